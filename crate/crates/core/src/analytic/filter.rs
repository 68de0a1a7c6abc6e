//! Roots-of-unity filter for slot-count congruences when n labelled primes
//! are distributed uniformly over k slots.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::Kahan;
use crate::{Error, Result};

const MAX_N: u32 = 12;
const MAX_STATES: u64 = 729;

/// Both sides of the filter identity at one parameter point, together with
/// the single-main-term approximation and its error bound.
#[derive(Debug, Clone, Serialize)]
pub struct FilterReport {
    pub l: u64,
    pub k: usize,
    pub n: u32,
    pub a: Vec<u64>,
    pub lhs: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub diff: f64,
    pub main_term: f64,
    pub approx_error: f64,
    pub approx_bound: f64,
}

/// Fraction of the k^n assignments of n labelled primes to k slots whose
/// slot counts match `a` mod l, against the character-sum expression
/// l^{-k} Σ_c ζ^{-c·a} ((Σ_g ζ^{c_g}) / k)^n for the same fraction.
///
/// Also reports the dominant term l^{1-k} [n ≡ Σa mod l] and checks the
/// remaining character terms against the bound k δ^n, where δ is the
/// largest |Σ_g ζ^{c_g}| / k over nonconstant c.
pub fn filter_identity_check(l: u64, k: usize, a: &[u64], n: u32) -> Result<FilterReport> {
    if l < 2 || k == 0 {
        return Err(Error::Invalid(format!("need l >= 2 and k >= 1, got l = {l}, k = {k}")));
    }
    if a.len() != k || a.iter().any(|&ag| ag >= l) {
        return Err(Error::Invalid(format!("residue vector must have {k} entries below {l}")));
    }
    if n > MAX_N {
        return Err(Error::CapExceeded(format!("n = {n} exceeds {MAX_N}")));
    }
    let states = match l.checked_pow(k as u32) {
        Some(s) if s <= MAX_STATES => s as usize,
        _ => return Err(Error::CapExceeded(format!("l^k for l = {l}, k = {k} exceeds {MAX_STATES}"))),
    };
    let lu = l as usize;
    let strides: Vec<usize> = (0..k).map(|g| lu.pow(g as u32)).collect();

    // exact count of assignments, indexed by slot-count residue vectors in
    // little-endian base-l digits
    let mut dp = vec![0u64; states];
    dp[0] = 1;
    for _ in 0..n {
        let mut step = vec![0u64; states];
        for s in 0..states {
            if dp[s] == 0 {
                continue;
            }
            for g in 0..k {
                let digit = s / strides[g] % lu;
                let t = if digit + 1 == lu { s - digit * strides[g] } else { s + strides[g] };
                step[t] += dp[s];
            }
        }
        dp = step;
    }
    let target: usize = a.iter().zip(&strides).map(|(&ag, &st)| ag as usize * st).sum();
    // both sides of the division stay below 3^12, so the quotient is exact
    let lhs = dp[target] as f64 / (k as f64).powi(n as i32);

    let zeta: Vec<Complex64> =
        (0..lu).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / l as f64)).collect();
    let mut acc = Kahan::default();
    let mut delta = 0.0f64;
    for c in 0..states {
        let mut dot = 0u64;
        let mut avg = Complex64::default();
        let mut constant = true;
        let head = c % lu;
        for g in 0..k {
            let cg = c / strides[g] % lu;
            if cg != head {
                constant = false;
            }
            dot = (dot + cg as u64 * a[g]) % l;
            avg += zeta[cg];
        }
        let avg = avg / k as f64;
        if !constant {
            delta = delta.max(avg.norm());
        }
        acc.add(zeta[((l - dot) % l) as usize] * avg.powu(n));
    }
    let rhs = acc.value() / states as f64;

    let main_term = if (n as u64) % l == a.iter().sum::<u64>() % l {
        (l as f64).powi(1 - k as i32)
    } else {
        0.0
    };
    let approx_error = (rhs - main_term).norm();
    let approx_bound = k as f64 * delta.powi(n as i32);
    assert!(
        approx_error <= approx_bound + 1e-9,
        "character tail {approx_error} above its bound {approx_bound}"
    );
    let diff = (rhs - lhs).norm();
    Ok(FilterReport {
        l,
        k,
        n,
        a: a.to_vec(),
        lhs,
        rhs_re: rhs.re,
        rhs_im: rhs.im,
        diff,
        main_term,
        approx_error,
        approx_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Walks every assignment explicitly instead of the residue dp.
    fn brute_lhs(l: u64, k: usize, a: &[u64], n: u32) -> f64 {
        let total = (k as u64).pow(n);
        let mut hits = 0u64;
        for code in 0..total {
            let mut counts = vec![0u64; k];
            let mut c = code;
            for _ in 0..n {
                counts[(c % k as u64) as usize] += 1;
                c /= k as u64;
            }
            if counts.iter().zip(a).all(|(&cnt, &ag)| cnt % l == ag) {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    }

    #[test]
    fn empty_product() {
        let r = filter_identity_check(2, 2, &[0, 0], 0).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs_re - 1.0).abs() < 1e-12 && r.rhs_im.abs() < 1e-12);
        assert_eq!(r.main_term, 0.5);
        let r = filter_identity_check(2, 2, &[1, 0], 0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.diff < 1e-12);
    }

    #[test]
    fn matches_brute_enumeration() {
        for (l, k, a, n) in [
            (2, 2, vec![1, 0], 3),
            (3, 2, vec![2, 1], 5),
            (2, 3, vec![1, 1, 0], 6),
            (3, 1, vec![2], 7),
            (3, 3, vec![0, 2, 1], 8),
        ] {
            let r = filter_identity_check(l, k, &a, n).unwrap();
            let b = brute_lhs(l, k, &a, n);
            assert!((r.lhs - b).abs() < 1e-12, "lhs {l} {k} {n}: {} vs {b}", r.lhs);
            assert!(r.diff < 1e-12, "identity {l} {k} {n}: {}", r.diff);
        }
    }

    #[test]
    fn single_slot_has_no_character_tail() {
        let r = filter_identity_check(3, 1, &[1], 4).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_eq!(r.approx_bound, 0.0);
        assert!(r.approx_error < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(filter_identity_check(1, 2, &[0, 0], 3).is_err());
        assert!(filter_identity_check(2, 2, &[2, 0], 3).is_err());
        assert!(filter_identity_check(2, 2, &[0], 3).is_err());
        assert!(filter_identity_check(2, 2, &[0, 0], 13).is_err());
        assert!(filter_identity_check(3, 7, &[0; 7], 2).is_err());
    }
}
