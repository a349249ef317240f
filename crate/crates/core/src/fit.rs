//! Least-squares exponent fits.

use crate::error::{Error, Result};

/// Straight-line fit y = intercept + slope·x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
    pub points: usize,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::Degenerate(format!("line fit needs >= 3 paired points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let slope_se = (rss / (n as f64 - 2.0) / sxx).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        slope_se,
        points: n,
    })
}

/// Fit of log y against x; every y must be positive.
pub fn log_line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if let Some(bad) = y.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Degenerate(format!("cannot take log of {bad}")));
    }
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    line_fit(x, &ly)
}

/// Index range covering the middle `frac` of `0..n`.
pub fn middle(n: usize, frac: f64) -> std::ops::Range<usize> {
    let skip = ((1.0 - frac) * 0.5 * n as f64).round() as usize;
    skip..n - skip
}

/// Two-exponential fit y ≈ a·e^{−x} + c·e^{−λx}, λ found by golden-section
/// search on [lo, hi] with (a, c) solved by relative-weighted least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoExpFit {
    pub lambda: f64,
    pub a: f64,
    pub c: f64,
    pub rel_rms: f64,
}

fn two_exp_residual(x: &[f64], y: &[f64], lambda: f64) -> (f64, f64, f64) {
    // Weighted normal equations with weights 1/y² (relative residual).
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let w = 1.0 / (yi * yi);
        let (u, v) = ((-xi).exp(), (-lambda * xi).exp());
        s11 += w * u * u;
        s12 += w * u * v;
        s22 += w * v * v;
        r1 += w * u * yi;
        r2 += w * v * yi;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-14 * s11 * s22 {
        return (f64::INFINITY, 0.0, 0.0);
    }
    let a = (r1 * s22 - r2 * s12) / det;
    let c = (s11 * r2 - s12 * r1) / det;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = (yi - a * (-xi).exp() - c * (-lambda * xi).exp()) / yi;
            r * r
        })
        .sum();
    ((rss / x.len() as f64).sqrt(), a, c)
}

pub fn two_exp_fit(x: &[f64], y: &[f64], lo: f64, hi: f64) -> Result<TwoExpFit> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::Degenerate("two-exponential fit needs >= 4 points".into()));
    }
    if y.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Degenerate("two-exponential fit needs positive data".into()));
    }
    // Coarse scan first: the objective is not unimodal across λ = 1.
    let scan = 400;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=scan {
        let l = lo + (hi - lo) * i as f64 / scan as f64;
        let r = two_exp_residual(x, y, l).0;
        if r < best.0 {
            best = (r, l);
        }
    }
    let step = (hi - lo) / scan as f64;
    let (mut a, mut b) = ((best.1 - step).max(lo), (best.1 + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if two_exp_residual(x, y, c).0 < two_exp_residual(x, y, d).0 {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    let lambda = 0.5 * (a + b);
    let (rel_rms, a_coef, c_coef) = two_exp_residual(x, y, lambda);
    Ok(TwoExpFit {
        lambda,
        a: a_coef,
        c: c_coef,
        rel_rms,
    })
}
