//! Least-squares shape fits for counts on dyadic windows.

use serde::Serialize;

use crate::counting::Window;
use crate::{Error, Result};

/// Windows with fewer counts than this are dropped before fitting; small
/// windows carry more relative noise than leverage.
pub const MIN_WINDOW_COUNT: u64 = 100;

const MIN_POINTS: usize = 6;

/// Result of a regression over dyadic windows. For `fit_log_power` the
/// regressor is log log x and `slope` estimates the log exponent (b - 1 in
/// the Malle shape) under the assumed power `a`; for `fit_exponent` the
/// regressor is log x, `slope` estimates the power itself and `a` echoes it.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub a: f64,
    pub slope: f64,
    pub c: f64,
    pub residual: f64,
    pub windows: Vec<Window>,
}

/// Ordinary least squares of y against t. Returns (slope, intercept, rms).
pub(crate) fn linreg(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for &(t, y) in pts {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let rms = (pts
        .iter()
        .map(|&(t, y)| {
            let r = y - slope * t - intercept;
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

fn usable(windows: &[Window]) -> Vec<Window> {
    windows
        .iter()
        .filter(|w| w.count >= MIN_WINDOW_COUNT && w.x >= 3)
        .cloned()
        .collect()
}

/// Fit log(N / x^a) against log log x; the slope estimates the power of
/// log x and exp(intercept) the leading constant.
pub fn fit_log_power(windows: &[Window], a: f64) -> Result<FitReport> {
    let used = usable(windows);
    if used.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} usable windows, need {}",
            used.len(),
            MIN_POINTS
        )));
    }
    let pts: Vec<(f64, f64)> = used
        .iter()
        .map(|w| {
            let x = w.x as f64;
            (x.ln().ln(), (w.count as f64).ln() - a * x.ln())
        })
        .collect();
    let (slope, intercept, residual) = linreg(&pts);
    Ok(FitReport { a, slope, c: intercept.exp(), residual, windows: used })
}

/// Fit log N against log x; the slope estimates the growth exponent.
pub fn fit_exponent(windows: &[Window]) -> Result<FitReport> {
    let used = usable(windows);
    if used.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} usable windows, need {}",
            used.len(),
            MIN_POINTS
        )));
    }
    let pts: Vec<(f64, f64)> = used
        .iter()
        .map(|w| ((w.x as f64).ln(), (w.count as f64).ln()))
        .collect();
    let (slope, intercept, residual) = linreg(&pts);
    Ok(FitReport { a: slope, slope, c: intercept.exp(), residual, windows: used })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic<F: Fn(f64) -> f64>(top: u64, k: u32, f: F) -> Vec<Window> {
        (0..k)
            .rev()
            .map(|i| {
                let x = top >> i;
                Window { x, count: f(x as f64).round() as u64 }
            })
            .collect()
    }

    #[test]
    fn recovers_square_log_power() {
        let ws = synthetic(1 << 40, 12, |x| x.sqrt() * x.ln().powi(2));
        let fit = fit_log_power(&ws, 0.5).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-3, "slope {}", fit.slope);
    }

    #[test]
    fn recovers_linear_constant() {
        let ws = synthetic(1 << 30, 10, |x| 3.0 * x);
        let fit = fit_log_power(&ws, 1.0).unwrap();
        assert!(fit.slope.abs() < 1e-6, "slope {}", fit.slope);
        assert!((fit.c - 3.0).abs() < 1e-6, "c {}", fit.c);
    }

    #[test]
    fn recovers_exponent() {
        let ws = synthetic(1 << 40, 12, |x| 2.0 * x.powf(0.25));
        let fit = fit_exponent(&ws).unwrap();
        assert!((fit.slope - 0.25).abs() < 2e-2, "slope {}", fit.slope);
    }

    #[test]
    fn rejects_short_series() {
        let ws = synthetic(1 << 8, 4, |x| x);
        assert!(matches!(
            fit_log_power(&ws, 1.0),
            Err(Error::InsufficientData(_))
        ));
    }
}
