//! Quadratic characters attached to squarefree integers, decomposed over the
//! basis {chi_{-1}, chi_2, chi_{p*} for odd p} of the group of quadratic
//! characters of Q.

use crate::arith::kronecker;
use crate::{Error, Result};

/// F_2 coordinates of chi_d over the standard basis. `odd_primes` carries the
/// odd primes with coefficient 1, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharDecomp {
    pub coeff_minus1: u8,
    pub coeff_2: u8,
    pub odd_primes: Vec<u64>,
}

/// Topological generators of the relevant local Galois data: the tame
/// generator at an odd p, and the two normalized generators at 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InertiaGen {
    OddP(u64),
    TwoFirst,
    TwoSecond,
}

/// Decomposes chi_d for squarefree d != 0, 1. chi_{p*} is the character of
/// the quadratic field of odd prime conductor p, so chi_d = chi_{-1}^e1 *
/// chi_2^e2 * prod chi_{p*} with e1 matching the total sign contribution.
pub fn chi_basis_decompose(d: i64) -> Result<CharDecomp> {
    if d == 0 {
        return Err(Error::Invalid("chi_0 undefined".into()));
    }
    if d == 1 {
        return Err(Error::UnitInput);
    }
    let mut n = d.unsigned_abs();
    let coeff_2 = (n % 2 == 0) as u8;
    if coeff_2 == 1 {
        n /= 2;
        if n % 2 == 0 {
            return Err(Error::Invalid(format!("{d} is not squarefree")));
        }
    }
    let mut odd_primes = Vec::new();
    let mut sign_flips = (d < 0) as u8;
    let mut q = 3u64;
    while q * q <= n {
        if n % q == 0 {
            n /= q;
            if n % q == 0 {
                return Err(Error::Invalid(format!("{d} is not squarefree")));
            }
            if q % 4 == 3 {
                sign_flips ^= 1;
            }
            odd_primes.push(q);
        }
        q += 2;
    }
    if n > 1 {
        if n % 4 == 3 {
            sign_flips ^= 1;
        }
        odd_primes.push(n);
    }
    Ok(CharDecomp { coeff_minus1: sign_flips, coeff_2, odd_primes })
}

impl CharDecomp {
    /// Reassembles the signed squarefree integer this decomposition came from.
    pub fn value(&self) -> i128 {
        let mut v: i128 = 1;
        for &p in &self.odd_primes {
            // p* = (-1)^((p-1)/2) p
            v *= if p % 4 == 3 { -(p as i128) } else { p as i128 };
        }
        if self.coeff_minus1 == 1 {
            v = -v;
        }
        if self.coeff_2 == 1 {
            v *= 2;
        }
        v
    }

    pub fn is_trivial(&self) -> bool {
        self.coeff_minus1 == 0 && self.coeff_2 == 0 && self.odd_primes.is_empty()
    }
}

/// Value of the decomposed character on an inertia generator, additively in
/// F_2. The normalized generators at 2 pick out the chi_2 and chi_{-1}
/// coordinates; the tame generator at odd p picks out chi_{p*}.
pub fn chi_eval_inertia(dec: &CharDecomp, gen: InertiaGen) -> u8 {
    match gen {
        InertiaGen::OddP(p) => dec.odd_primes.binary_search(&p).is_ok() as u8,
        InertiaGen::TwoFirst => dec.coeff_2,
        InertiaGen::TwoSecond => dec.coeff_minus1,
    }
}

/// chi_d(Frob_q) for an odd prime q not dividing 2d, additively in F_2.
pub fn chi_eval_frob(d: i64, q: u64) -> Result<u8> {
    if q < 3 || q % 2 == 0 {
        return Err(Error::Invalid(format!("{q} is not an odd prime")));
    }
    if d == 0 {
        return Err(Error::Invalid("chi_0 undefined".into()));
    }
    if d.unsigned_abs() % q == 0 {
        return Err(Error::RamifiedEval { p: q });
    }
    Ok(if kronecker(d, q as i64) == 1 { 0 } else { 1 })
}

/// Absolute discriminant of Q(sqrt(d)) for squarefree d != 0, 1.
pub fn quadratic_disc(d: i64) -> Result<u64> {
    if d == 0 {
        return Err(Error::Invalid("not a quadratic field".into()));
    }
    if d == 1 {
        return Err(Error::UnitInput);
    }
    Ok(if d.rem_euclid(4) == 1 {
        d.unsigned_abs()
    } else {
        4 * d.unsigned_abs()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_reassemble_roundtrip() {
        for d in -300i64..=300 {
            if d == 0 || d == 1 {
                continue;
            }
            let sf = (2..=17).all(|k: i64| d % (k * k) != 0);
            if !sf {
                continue;
            }
            let dec = chi_basis_decompose(d).unwrap();
            assert_eq!(dec.value(), d as i128, "d={d}");
        }
    }

    #[test]
    fn decompose_examples() {
        let dec = chi_basis_decompose(-1).unwrap();
        assert_eq!((dec.coeff_minus1, dec.coeff_2), (1, 0));
        assert!(dec.odd_primes.is_empty());

        // -3 = -1 * 3 and 3 = -(3*), so chi_{-3} = chi_{3*}
        let dec = chi_basis_decompose(-3).unwrap();
        assert_eq!((dec.coeff_minus1, dec.coeff_2), (0, 0));
        assert_eq!(dec.odd_primes, vec![3]);

        let dec = chi_basis_decompose(3).unwrap();
        assert_eq!((dec.coeff_minus1, dec.coeff_2), (1, 0));
        assert_eq!(dec.odd_primes, vec![3]);

        let dec = chi_basis_decompose(10).unwrap();
        assert_eq!((dec.coeff_minus1, dec.coeff_2), (0, 1));
        assert_eq!(dec.odd_primes, vec![5]);

        assert!(matches!(chi_basis_decompose(1), Err(Error::UnitInput)));
        assert!(chi_basis_decompose(12).is_err());
    }

    #[test]
    fn inertia_eval() {
        let dec = chi_basis_decompose(-6).unwrap();
        // -6 = (-1)*2*3: 3 contributes a sign flip, so coeff_minus1 = 0
        assert_eq!(chi_eval_inertia(&dec, InertiaGen::OddP(3)), 1);
        assert_eq!(chi_eval_inertia(&dec, InertiaGen::OddP(5)), 0);
        assert_eq!(chi_eval_inertia(&dec, InertiaGen::TwoFirst), 1);
        assert_eq!(chi_eval_inertia(&dec, InertiaGen::TwoSecond), 0);
    }

    #[test]
    fn frob_eval() {
        // chi_5(Frob_q) tests q mod 5 squareness
        assert_eq!(chi_eval_frob(5, 11).unwrap(), 0);
        assert_eq!(chi_eval_frob(5, 7).unwrap(), 1);
        assert_eq!(chi_eval_frob(1, 7).unwrap(), 0);
        assert!(matches!(chi_eval_frob(10, 5), Err(Error::RamifiedEval { p: 5 })));
        // unramified at 2 iff d = 1 mod 4; chi_{-3}(Frob) is defined at any odd q
        assert_eq!(chi_eval_frob(-3, 5).unwrap(), 1);
        assert_eq!(chi_eval_frob(-3, 7).unwrap(), 0);
    }

    #[test]
    fn quadratic_disc_examples() {
        assert_eq!(quadratic_disc(-3).unwrap(), 3);
        assert_eq!(quadratic_disc(-15).unwrap(), 15);
        assert_eq!(quadratic_disc(5).unwrap(), 5);
        assert_eq!(quadratic_disc(3).unwrap(), 12);
        assert_eq!(quadratic_disc(-1).unwrap(), 4);
        assert_eq!(quadratic_disc(2).unwrap(), 8);
        assert_eq!(quadratic_disc(-5).unwrap(), 20);
        assert!(matches!(quadratic_disc(1), Err(Error::UnitInput)));
    }
}
