//! Hyperbola-method evaluation of convolution partial sums against the
//! predicted main term with its explicit binomial-series constant.

use std::f64::consts::PI;

use serde::Serialize;

use crate::arith::Sieve;
use crate::{Error, Result};

/// The hyperbola pass costs about 2 x^{3/4} divisor-sum evaluations.
pub const CONV_CAP: u64 = 1_000_000_000_000;

/// Exact evaluator for one side of a convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SumEval {
    /// Squarefree indicator.
    Squarefree,
    /// 1 at n = 1 and 0 elsewhere, the convolution identity.
    UnitAtOne,
}

/// Arithmetic function paired with the closed form C x (log x)^A claimed
/// for its partial sums.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FnSpec {
    pub eval: SumEval,
    pub c: f64,
    pub log_power: f64,
}

impl FnSpec {
    /// Squarefree indicator; partial sums approach (6/pi^2) x.
    pub fn squarefree() -> Self {
        FnSpec { eval: SumEval::Squarefree, c: 6.0 / (PI * PI), log_power: 0.0 }
    }

    /// Convolution identity; partial sums are the constant 1.
    pub fn unit() -> Self {
        FnSpec { eval: SumEval::UnitAtOne, c: 1.0, log_power: 0.0 }
    }
}

/// One comparison of the exact convolution sum with its predicted shape.
#[derive(Debug, Clone, Serialize)]
pub struct ConvReport {
    pub x: u64,
    pub direct: f64,
    pub predicted: f64,
    pub rel_error: f64,
    /// Leading constant of the prediction.
    pub c3: f64,
}

fn isqrt(x: u64) -> u64 {
    let mut s = (x as f64).sqrt() as u64;
    while s * s > x {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= x {
        s += 1;
    }
    s
}

fn point(eval: SumEval, d: u64, sieve: &Sieve) -> i64 {
    match eval {
        SumEval::UnitAtOne => (d == 1) as i64,
        SumEval::Squarefree => (sieve.mu(d) != 0) as i64,
    }
}

/// Exact partial sum up to y; the squarefree case runs the standard
/// Σ μ(d) ⌊y/d²⌋ identity, which only needs the sieve up to √y.
fn partial(eval: SumEval, y: u64, sieve: &Sieve) -> i64 {
    match eval {
        SumEval::UnitAtOne => 1,
        SumEval::Squarefree => {
            let mut s = 0i64;
            let mut d = 1u64;
            while d * d <= y {
                let m = sieve.mu(d) as i64;
                if m != 0 {
                    s += m * (y / (d * d)) as i64;
                }
                d += 1;
            }
            s
        }
    }
}

/// Leading constant of the convolution estimate, assembled from the two
/// binomial series. Terms decay geometrically by roughly 1/2 per step, so
/// truncation below 1e-12 converges fast for any log powers above -1.
pub fn c3_constant(c1: f64, c2: f64, a: f64, b: f64) -> Result<f64> {
    if a <= -1.0 || b <= -1.0 {
        return Err(Error::Invalid(format!("log powers must exceed -1, got {a} and {b}")));
    }
    Ok(c1 * c2 * (half_series(a, b)? + half_series(b, a)?))
}

/// 2^{-a-1} Σ_k (-1)^k binom(b, k) / (2^k (a + k + 1)).
fn half_series(a: f64, b: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut binom = 1.0;
    let mut sign = 1.0;
    let mut pow2 = 1.0;
    for k in 0..=200u32 {
        let term = sign * binom / (pow2 * (a + k as f64 + 1.0));
        total += term;
        if term.abs() < 1e-12 {
            return Ok(0.5f64.powf(a + 1.0) * total);
        }
        binom *= (b - k as f64) / (k as f64 + 1.0);
        sign = -sign;
        pow2 *= 2.0;
    }
    Err(Error::SeriesDivergence(format!(
        "binomial series for powers ({a}, {b}) still above 1e-12 after 200 terms"
    )))
}

/// Exact Σ_{n ≤ x} (f*g)(n) by the hyperbola method, compared with the
/// predicted main term. A unit side collapses the prediction to the other
/// side's closed form; otherwise it is c3 x (log x)^{A+B+1}.
pub fn convolution_check(f: &FnSpec, g: &FnSpec, x: u64) -> Result<ConvReport> {
    if x < 4 {
        return Err(Error::Invalid(format!("convolution check needs x >= 4, got {x}")));
    }
    if x > CONV_CAP {
        return Err(Error::CapExceeded(format!("x = {x} exceeds {CONV_CAP}")));
    }
    if f.log_power <= -1.0 || g.log_power <= -1.0 {
        return Err(Error::Invalid("log powers must exceed -1".into()));
    }
    let s = isqrt(x);
    let sieve = Sieve::new(s.max(2))?;
    // integer arithmetic throughout, so swapping f and g is exactly neutral
    let mut sum = 0i64;
    for d in 1..=s {
        let fd = point(f.eval, d, &sieve);
        if fd != 0 {
            sum += fd * partial(g.eval, x / d, &sieve);
        }
    }
    for e in 1..=s {
        let ge = point(g.eval, e, &sieve);
        if ge != 0 {
            sum += ge * partial(f.eval, x / e, &sieve);
        }
    }
    sum -= partial(f.eval, s, &sieve) * partial(g.eval, s, &sieve);
    let xf = x as f64;
    let (predicted, c3) = match (f.eval, g.eval) {
        (SumEval::UnitAtOne, SumEval::UnitAtOne) => (1.0, 1.0),
        (SumEval::UnitAtOne, _) => (g.c * xf * xf.ln().powf(g.log_power), g.c),
        (_, SumEval::UnitAtOne) => (f.c * xf * xf.ln().powf(f.log_power), f.c),
        _ => {
            let c3 = c3_constant(f.c, g.c, f.log_power, g.log_power)?;
            (c3 * xf * xf.ln().powf(f.log_power + g.log_power + 1.0), c3)
        }
    };
    let direct = sum as f64;
    let rel_error = (direct - predicted).abs() / predicted.abs();
    Ok(ConvReport { x, direct, predicted, rel_error, c3 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_collapses_for_zero_log_powers() {
        let c = c3_constant(0.6079, 0.6079, 0.0, 0.0).unwrap();
        assert!((c - 0.6079 * 0.6079).abs() < 1e-15);
    }

    #[test]
    fn constant_positive_on_grid() {
        for a in [-0.5, 0.0, 0.5, 1.0, 2.0] {
            for b in [-0.5, 0.0, 0.5, 1.0, 2.0] {
                let c = c3_constant(1.0, 1.0, a, b).unwrap();
                assert!(c > 0.0, "c3 at ({a}, {b}) = {c}");
            }
        }
        assert!(c3_constant(1.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn small_value_by_hand() {
        // sum over n <= 10 of the number of factorizations n = d e with
        // both parts squarefree: 1,2,2,1,2,4,2,0,1,4
        let f = FnSpec::squarefree();
        let r = convolution_check(&f, &f, 10).unwrap();
        assert_eq!(r.direct, 19.0);
    }

    #[test]
    fn unit_side_reduces_to_the_plain_sum() {
        let r = convolution_check(&FnSpec::squarefree(), &FnSpec::unit(), 1_000_000).unwrap();
        assert_eq!(r.direct, 607_926.0);
        assert!(r.rel_error < 0.002, "rel {}", r.rel_error);
        let u = convolution_check(&FnSpec::unit(), &FnSpec::unit(), 100).unwrap();
        assert_eq!(r.c3, 6.0 / (PI * PI));
        assert_eq!(u.direct, 1.0);
    }

    #[test]
    fn argument_order_is_exactly_neutral() {
        let f = FnSpec::squarefree();
        let g = FnSpec::unit();
        let a = convolution_check(&f, &g, 50_000).unwrap();
        let b = convolution_check(&g, &f, 50_000).unwrap();
        assert_eq!(a.direct, b.direct);
        assert_eq!(a.predicted, b.predicted);
        assert_eq!(a.rel_error, b.rel_error);
    }

    #[test]
    fn squarefree_pair_tracks_x_log_x() {
        let f = FnSpec::squarefree();
        let r = convolution_check(&f, &f, 1_000_000).unwrap();
        // secondary terms of order x still hold the ratio away from 1
        assert!(r.rel_error < 0.25, "rel {}", r.rel_error);
        assert!(r.direct > r.predicted);
    }
}
