//! Numerical checks for the analytic machinery: restricted squarefree
//! z^omega sums, the hyperbola-method convolution estimate with its explicit
//! constant, and the roots-of-unity multinomial filter.

mod conv;
mod filter;

pub use conv::{c3_constant, convolution_check, ConvReport, FnSpec, SumEval};
pub use filter::{filter_identity_check, FilterReport};

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{factor_u64, gcd_u64, Sieve};
use crate::counting::{linreg, FitReport, Window};
use crate::{Error, Result};

/// Largest |z| accepted by the restricted sums; beyond this the z^omega
/// weights dwarf everything the fits could resolve.
pub const MAX_Z_NORM: f64 = 16.0;

/// Compensated complex accumulator; the sums mix terms of very different
/// magnitude once |z| is large.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Kahan {
    s: Complex64,
    c: Complex64,
}

impl Kahan {
    pub(crate) fn add(&mut self, v: Complex64) {
        let y = v - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    pub(crate) fn value(&self) -> Complex64 {
        self.s
    }
}

/// Restriction on which primes may divide the summed integers: the prime
/// must land in one of the residue classes mod `modulus` and must avoid a
/// finite excluded set.
#[derive(Debug, Clone, Serialize)]
pub struct PrimeCondition {
    modulus: u64,
    residues: Vec<u64>,
    excluded: Vec<u64>,
    density: f64,
}

impl PrimeCondition {
    /// No restriction at all.
    pub fn all() -> Self {
        PrimeCondition { modulus: 1, residues: vec![0], excluded: Vec::new(), density: 1.0 }
    }

    pub fn new(modulus: u64, residues: &[u64], excluded: &[u64]) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Invalid("prime condition needs a positive modulus".into()));
        }
        let mut rs: Vec<u64> = residues.iter().map(|&r| r % modulus).collect();
        rs.sort_unstable();
        rs.dedup();
        if rs.is_empty() {
            return Err(Error::Invalid("prime condition needs at least one residue".into()));
        }
        for &r in &rs {
            if gcd_u64(r, modulus) != 1 {
                return Err(Error::Invalid(format!("residue {r} not coprime to {modulus}")));
            }
        }
        let mut ex: Vec<u64> = excluded.to_vec();
        ex.sort_unstable();
        ex.dedup();
        let density = rs.len() as f64 / phi(modulus) as f64;
        Ok(PrimeCondition { modulus, residues: rs, excluded: ex, density })
    }

    /// Fraction of primes satisfying the congruence part.
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn allows(&self, p: u64) -> bool {
        self.residues.binary_search(&(p % self.modulus)).is_ok() && !self.excluded.contains(&p)
    }
}

fn phi(m: u64) -> u64 {
    let mut out = m;
    for (p, _) in factor_u64(m) {
        out = out / p * (p - 1);
    }
    out
}

/// Exact Σ_{n ≤ x} μ²(n) z^{ω(n)} over n all of whose prime factors
/// satisfy `cond`. The empty product n = 1 always contributes 1.
pub fn a_z_sum(x: u64, z: Complex64, cond: &PrimeCondition) -> Result<Complex64> {
    Ok(a_z_partials(&[x], z, cond)?[0])
}

/// One sieve pass reporting the restricted sum at every checkpoint; the
/// checkpoints must be strictly increasing and start at 1 or later.
pub fn a_z_partials(xs: &[u64], z: Complex64, cond: &PrimeCondition) -> Result<Vec<Complex64>> {
    if xs.is_empty() || xs[0] == 0 || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("checkpoints must be strictly increasing and positive".into()));
    }
    if z.norm() > MAX_Z_NORM {
        return Err(Error::Invalid(format!("|z| = {:.3} exceeds {MAX_Z_NORM}", z.norm())));
    }
    let top = *xs.last().unwrap();
    let one = Complex64::new(1.0, 0.0);
    if top < 2 {
        return Ok(vec![one; xs.len()]);
    }
    let sieve = Sieve::new(top)?;
    // omega(n) < 16 for every n within the sieve cap
    let mut zpow = [one; 16];
    for i in 1..16 {
        zpow[i] = zpow[i - 1] * z;
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut next = 0;
    if xs[0] == 1 {
        out.push(one);
        next = 1;
    }
    let mut acc = Kahan::default();
    acc.add(one);
    for n in 2..=top {
        if sieve.is_squarefree(n) {
            let mut m = n;
            let mut ok = true;
            while m > 1 {
                let p = sieve.lpf(m) as u64;
                if !cond.allows(p) {
                    ok = false;
                    break;
                }
                m /= p;
            }
            if ok {
                acc.add(zpow[sieve.omega(n) as usize]);
            }
        }
        if next < xs.len() && xs[next] == n {
            out.push(acc.value());
            next += 1;
        }
    }
    Ok(out)
}

/// Fits the restricted sum to C x (log x)^s across the checkpoints; the
/// expected log power is z * density(cond) - 1. The windows echo the sums
/// rounded to integers.
pub fn sd_shape_check(z: f64, cond: &PrimeCondition, xs: &[u64]) -> Result<FitReport> {
    if z < 0.0 {
        return Err(Error::Invalid("shape fit needs a nonnegative real z".into()));
    }
    let sums = a_z_partials(xs, Complex64::new(z, 0.0), cond)?;
    let mut pts = Vec::new();
    let mut windows = Vec::new();
    for (&x, s) in xs.iter().zip(&sums) {
        // below x = 3 the regressor log log x is useless
        if x < 3 || s.re < 1.0 {
            continue;
        }
        let xf = x as f64;
        pts.push((xf.ln().ln(), s.re.ln() - xf.ln()));
        windows.push(Window { x, count: s.re.round() as u64 });
    }
    if pts.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "{} usable checkpoints, need 6",
            pts.len()
        )));
    }
    let (slope, intercept, residual) = linreg(&pts);
    Ok(FitReport { a: 1.0, slope, c: intercept.exp(), residual, windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn condition_validation() {
        assert!(PrimeCondition::new(0, &[1], &[]).is_err());
        assert!(PrimeCondition::new(4, &[2], &[]).is_err());
        assert!(PrimeCondition::new(4, &[], &[]).is_err());
        let c = PrimeCondition::new(4, &[1], &[]).unwrap();
        assert_eq!(c.density(), 0.5);
        assert!(c.allows(5) && c.allows(13));
        assert!(!c.allows(3) && !c.allows(2));
        let c = PrimeCondition::new(12, &[1, 5, 7, 11], &[3]).unwrap();
        assert_eq!(c.density(), 1.0);
        assert!(!c.allows(3));
        assert!(PrimeCondition::all().allows(2));
    }

    #[test]
    fn z_zero_keeps_only_the_unit() {
        let s = a_z_sum(1000, Complex64::new(0.0, 0.0), &PrimeCondition::all()).unwrap();
        assert_eq!(s, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn z_one_counts_squarefrees() {
        let s = a_z_sum(10_000, Complex64::new(1.0, 0.0), &PrimeCondition::all()).unwrap();
        assert_eq!(s.re.round() as u64, 6083);
        assert_eq!(s.im, 0.0);
    }

    #[test]
    fn matches_per_n_accumulation_at_random_z() {
        let cond = PrimeCondition::new(4, &[1], &[13]).unwrap();
        let x = 10_000u64;
        let sieve = Sieve::new(x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let z = Complex64::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
            let mut naive = Complex64::new(1.0, 0.0);
            for n in 2..=x {
                if !sieve.is_squarefree(n) {
                    continue;
                }
                if sieve.factor(n).iter().all(|&p| cond.allows(p)) {
                    let mut t = Complex64::new(1.0, 0.0);
                    for _ in 0..sieve.omega(n) {
                        t *= z;
                    }
                    naive += t;
                }
            }
            let fast = a_z_sum(x, z, &cond).unwrap();
            assert!((fast - naive).norm() <= 1e-6 * naive.norm().max(1.0), "z = {z}");
        }
    }

    #[test]
    fn partials_agree_with_single_sums() {
        let cond = PrimeCondition::new(3, &[1], &[]).unwrap();
        let z = Complex64::new(2.0, 0.5);
        let xs = [1, 10, 500, 5000];
        let ps = a_z_partials(&xs, z, &cond).unwrap();
        for (&x, p) in xs.iter().zip(&ps) {
            assert_eq!(*p, a_z_sum(x, z, &cond).unwrap(), "x = {x}");
        }
        assert!(a_z_partials(&[10, 10], z, &cond).is_err());
        assert!(a_z_partials(&[0, 10], z, &cond).is_err());
        assert!(a_z_sum(100, Complex64::new(17.0, 0.0), &cond).is_err());
    }

    #[test]
    fn squarefree_shape_is_flat() {
        let xs: Vec<u64> = (0..10).map(|i| 4000u64 << i).collect();
        let fit = sd_shape_check(1.0, &PrimeCondition::all(), &xs).unwrap();
        assert!(fit.slope.abs() < 0.05, "slope {}", fit.slope);
        assert!((fit.c - 0.6079).abs() < 0.01, "c {}", fit.c);
        assert!(sd_shape_check(1.0, &PrimeCondition::all(), &[8, 16, 32]).is_err());
    }
}
