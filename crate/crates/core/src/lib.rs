//! Counting nilpotent Galois extensions of Q through squarefree-tuple coordinates.
//!
//! The library builds finite l-groups as towers of central F_l extensions,
//! parametrizes degree-#G extensions of Q by tuples of squarefree integers
//! indexed by the nonidentity group elements, decides local solvability per
//! tuple, and counts surjections ordered by discriminant-like height. An
//! independent Dirichlet-character oracle and a small analytic toolbox back
//! the counts with cross-checks.

pub mod analytic;
pub mod arith;
pub mod catalog;
pub mod counting;
pub mod group;
pub mod oracle;
pub mod param;
pub mod report;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
