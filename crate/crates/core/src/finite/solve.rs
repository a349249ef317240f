use super::generator::{build_generator, Generator};
use crate::crn::ModelParams;
use crate::error::{Error, Result};
use crate::linalg::{dense_solve, thomas};

/// Relative residual above which one refinement step is taken.
pub const REFINE_TRIGGER: f64 = 1e-10;

/// Time-integrated occupation x = ∫₀^∞ n(t) dt, solving A x = −n(0).
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// (x_S, x_0, …, x_N).
    pub x: Vec<f64>,
    /// log(1/p_res − 1), formed without cancellation.
    pub log_odds: f64,
    pub pres: f64,
    pub residual: f64,
    pub refined: bool,
}

/// (−T)⁻¹ applied to a vector, T the tridiagonal block on the complexes.
fn neg_block_solve(g: &Generator, rhs: &[f64]) -> Result<Vec<f64>> {
    let lower: Vec<f64> = g.lower.iter().map(|v| -v).collect();
    let upper: Vec<f64> = g.upper.iter().map(|v| -v).collect();
    let diag: Vec<f64> = g.diag.iter().map(|v| -v).collect();
    thomas(&lower, &diag, &upper, rhs)
}

/// Solve A x = y using the structure of A.
///
/// The S row is replaced by the sum of all rows, which the column-sum
/// identity turns into −μΣx − αe^Δ x_N = Σy. With w = (−T)⁻¹c ≥ 0 the
/// remaining scalar equation has a denominator that is a sum of positive
/// terms.
pub fn structured_solve(g: &Generator, y: &[f64]) -> Result<Vec<f64>> {
    let n = g.n;
    let w = neg_block_solve(g, &g.attach)?;
    let u_neg = neg_block_solve(g, &y[1..])?;
    let denom = g.mu * (1.0 + w.iter().sum::<f64>()) + g.out_rate * w[n];
    if !(denom > 0.0) {
        return Err(Error::Degenerate("mass balance denominator vanishes (mu = 0?)".into()));
    }
    let sum_y: f64 = y.iter().sum();
    let sum_u = -u_neg.iter().sum::<f64>();
    let xs = -(sum_y + g.mu * sum_u + g.out_rate * -u_neg[n]) / denom;
    let mut x = Vec::with_capacity(n + 2);
    x.push(xs);
    for k in 0..=n {
        x.push(-u_neg[k] + w[k] * xs);
    }
    Ok(x)
}

fn residual(g: &Generator, x: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let mut ax = vec![0.0; x.len()];
    g.apply(x, &mut ax);
    let r: Vec<f64> = ax.iter().zip(y).map(|(a, b)| b - a).collect();
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let yn = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    // normwise backward error, with 2 * max exit rate bounding the operator norm
    (r, rn / (2.0 * g.max_exit_rate() * xn + yn))
}

pub fn solve(p: &ModelParams) -> Result<Solution> {
    let g = build_generator(p)?;
    let n = g.n;
    let mut y = vec![0.0; n + 2];
    y[0] = -1.0;
    let w = neg_block_solve(&g, &g.attach)?;
    let mass = g.mu * (1.0 + w.iter().sum::<f64>());
    let out = g.out_rate * w[n];
    if !(mass > 0.0) {
        return Err(Error::Degenerate("mu = 0 makes the generator singular".into()));
    }
    let xs = 1.0 / (mass + out);
    let mut x: Vec<f64> = std::iter::once(xs).chain(w.iter().map(|v| v * xs)).collect();
    let (r, mut rel) = residual(&g, &x, &y);
    let mut refined = false;
    if rel > REFINE_TRIGGER {
        let d = structured_solve(&g, &r)?;
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        rel = residual(&g, &x, &y).1;
        refined = true;
    }
    let log_odds = mass.ln() - out.ln();
    let pres = out / (mass + out);
    Ok(Solution {
        x,
        log_odds,
        pres,
        residual: rel,
        refined,
    })
}

/// p_res = αe^Δ x_N.
pub fn pres_exact(p: &ModelParams) -> Result<f64> {
    solve(p).map(|s| s.pres)
}

/// (1/N)·log(1/p_res − 1).
pub fn log_odds_exact(p: &ModelParams) -> Result<f64> {
    solve(p).map(|s| s.log_odds / p.n as f64)
}

/// Reference solve with dense partial-pivot LU.
pub fn solve_dense(p: &ModelParams) -> Result<Vec<f64>> {
    let g = build_generator(p)?;
    let mut y = vec![0.0; g.dim()];
    y[0] = -1.0;
    dense_solve(&g.to_dense(), &y)
}

/// αe^Δ x_N + μΣx, which must equal 1.
pub fn total_probability(p: &ModelParams, x: &[f64]) -> f64 {
    p.k_phos() * x[p.n + 1] + p.mu() * x.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_lu() {
        for &(n, d, s) in &[(1, 0.0, 0.0), (5, 2.0, 1.0), (12, 0.1, -1.0), (30, 3.0, 2.5)] {
            let p = ModelParams::with_b(n, 1.0, d, s, 3f64.ln(), 0.3).unwrap();
            let a = solve(&p).unwrap();
            let b = solve_dense(&p).unwrap();
            for (u, v) in a.x.iter().zip(&b) {
                assert!((u - v).abs() <= 1e-9 * v.abs());
            }
        }
    }

    #[test]
    fn total_probability_identity() {
        let p = ModelParams::with_b(20, 1.0, 2.0, 1.5, 3f64.ln(), 2f64.ln()).unwrap();
        let s = solve(&p).unwrap();
        let tp = total_probability(&p, &s.x);
        assert!((tp - 1.0).abs() < 1e-12, "{tp}");
        assert!(s.residual < 1e-12, "{}", s.residual);
    }

    #[test]
    fn general_rhs() {
        let p = ModelParams::with_b(6, 0.7, 1.0, 0.2, 0.8, 0.4).unwrap();
        let g = build_generator(&p).unwrap();
        let y: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let x = structured_solve(&g, &y).unwrap();
        let (_, rel) = residual(&g, &x, &y);
        assert!(rel < 1e-12);
    }

    #[test]
    fn fig2_small_delta_never_responds() {
        for i in 0..=120 {
            let s = -2.0 + 0.05 * i as f64;
            let p = ModelParams::with_b(20, 1.0, 0.1, s, 3f64.ln(), 2f64.ln()).unwrap();
            assert!(pres_exact(&p).unwrap() < 0.05);
        }
    }

    #[test]
    fn log_odds_at_sigma_c() {
        let p = ModelParams::with_b(20, 1.0, 2.0, 0.0, 3f64.ln(), 2f64.ln()).unwrap();
        let sc = crate::analytic::sigma_c(2f64.ln(), &p).unwrap();
        assert!(log_odds_exact(&p.with_sigma(sc)).unwrap().abs() <= 0.25);
    }

    #[test]
    fn log_odds_limits_n40() {
        let p = ModelParams::with_b(40, 1.0, 0.1, 0.0, 3f64.ln(), 2f64.ln()).unwrap();
        assert!((log_odds_exact(&p).unwrap() - (p.energy - p.b())).abs() < 0.1);
        let q = p.with_delta(2.0);
        let sc = crate::analytic::sigma_c(2f64.ln(), &q).unwrap();
        let q = q.with_sigma(sc + 1.0);
        let target = crate::analytic::lambda(&q) - q.b();
        assert!((log_odds_exact(&q).unwrap() - target).abs() < 0.1);
    }
}
