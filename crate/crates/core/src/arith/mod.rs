//! Elementary number theory: sieve tables, Kronecker and Hilbert symbols,
//! quadratic character bookkeeping.

mod chars;
mod modular;
mod sieve;
mod symbols;

pub use chars::{chi_basis_decompose, chi_eval_frob, chi_eval_inertia, quadratic_disc, CharDecomp, InertiaGen};
pub use modular::{factor_u64, gcd_u64, inv_mod, mul_mod, pow_mod, primitive_root};
pub use sieve::Sieve;
pub use symbols::{hilbert, hilbert_bruteforce, kronecker, Place};
