use super::solve::solve;
use crate::analytic::{classify, phi_roots_shifted, Regime};
use crate::crn::ModelParams;
use crate::error::Result;

/// Time-integrated profile x_k/x_S against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileComparison {
    pub regime: Regime,
    /// x_k/x_S from the exact solve, k = 0..N.
    pub exact: Vec<f64>,
    /// Closed-form prediction for the same ratio.
    pub predicted: Vec<f64>,
    /// max_k |exact/predicted − 1| over 1 ≤ k ≤ N.
    pub max_rel_dev: f64,
}

impl ProfileComparison {
    /// log x_k/x_S slope over k in `range`.
    pub fn log_slope(&self, range: std::ops::Range<usize>) -> Result<f64> {
        let x: Vec<f64> = range.clone().map(|k| k as f64).collect();
        let y: Vec<f64> = range.map(|k| self.exact[k]).collect();
        crate::fit::log_line_fit(&x, &y).map(|f| f.slope)
    }
}

/// Closed form e^{−kE}[A + (F₁/x_S)φ^k + (F₂/x_S)φ₂^k] for k = 0..N.
///
/// The ladder rows carry the degradation rate μ on their diagonal, so the
/// constants are evaluated at Laplace variable z = μ, which makes the formula
/// exact for the finite model.
pub fn closed_form_profile(p: &ModelParams, x0_over_xs: f64) -> Vec<f64> {
    let mu = p.mu();
    let (phi, phi2) = phi_roots_shifted(p, mu);
    let a = 1.0 / (mu + p.k_detach() - p.alpha * p.delta.exp_m1() * p.energy.exp_m1());
    let m = (p.n + 1) as i32;
    // Work with φ₂^k/φ₂^{N+1} to avoid overflow.
    let r = phi / phi2;
    let rm = r.powi(m);
    let f1 = (a * phi2.powi(-m) + (x0_over_xs - a)) / (1.0 - rm);
    let f2_scaled = (a + (x0_over_xs - a) * phi.powi(m)) / (rm - 1.0);
    (0..=p.n)
        .map(|k| {
            let e = (-(k as f64) * p.energy).exp();
            let t1 = f1 * phi.powi(k as i32);
            let t2 = f2_scaled * phi2.powi(k as i32 - m);
            e * (a + t1 + t2)
        })
        .collect()
}

/// Critical-line outer profile k e^{−kE}/(α(e^{Δ+E} − 1)), relative to n_S.
pub fn critical_profile(p: &ModelParams) -> Vec<f64> {
    let c = 1.0 / (p.alpha * (p.delta + p.energy).exp_m1());
    (0..=p.n)
        .map(|k| c * k as f64 * (-(k as f64) * p.energy).exp())
        .collect()
}

pub fn quasi_steady_profile(p: &ModelParams) -> Result<ProfileComparison> {
    let sol = solve(p)?;
    let xs = sol.x[0];
    let exact: Vec<f64> = sol.x[1..].iter().map(|v| v / xs).collect();
    let regime = classify(p);
    let predicted = match regime {
        Regime::Critical => critical_profile(p),
        _ => closed_form_profile(p, exact[0]),
    };
    let max_rel_dev = (1..=p.n)
        .map(|k| (exact[k] / predicted[k] - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ProfileComparison {
        regime,
        exact,
        predicted,
        max_rel_dev,
    })
}

/// Outer approximation A(0)e^{−kE}, the subcritical mid-ladder profile.
pub fn outer_subcritical(p: &ModelParams) -> Vec<f64> {
    let a0 = 1.0 / (p.k_detach() - p.alpha * p.delta.exp_m1() * p.energy.exp_m1());
    (0..=p.n).map(|k| a0 * (-(k as f64) * p.energy).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, delta: f64, sigma: f64) -> ModelParams {
        ModelParams::with_b(n, 1.0, delta, sigma, 3f64.ln(), 2f64.ln()).unwrap()
    }

    #[test]
    fn closed_form_matches_solve() {
        for &(n, d, s) in &[(10, 0.1, 0.0), (25, 2.0, 0.0), (30, 2.0, 1.7), (5, 3.0, -1.0), (30, 0.3, 1.0)] {
            let c = quasi_steady_profile(&p(n, d, s)).unwrap();
            assert!(c.max_rel_dev < 1e-8, "n={n} d={d} s={s}: {}", c.max_rel_dev);
        }
    }

    #[test]
    fn subcritical_mid_ladder() {
        let q = p(25, 0.1, 1.5);
        let c = quasi_steady_profile(&q).unwrap();
        let outer = outer_subcritical(&q);
        for k in 5..=20 {
            assert!((c.exact[k] / outer[k] - 1.0).abs() < 0.05, "k={k}");
        }
    }

    #[test]
    fn supercritical_slope() {
        let q = p(25, 2.0, 0.0);
        let c = quasi_steady_profile(&q).unwrap();
        let slope = c.log_slope(5..21).unwrap();
        let target = -(q.energy - crate::analytic::phi_roots(&q).0.ln());
        assert!((slope / target - 1.0).abs() < 0.02, "{slope} vs {target}");
    }

    #[test]
    fn critical_flat() {
        let q = ModelParams::with_b(120, 1.0, 2f64.ln(), 0.0, 2f64.ln(), 0.3).unwrap();
        let c = quasi_steady_profile(&q).unwrap();
        assert_eq!(c.regime, Regime::Critical);
        let ratios: Vec<f64> = (30..=90)
            .map(|k| c.exact[k] / (k as f64 * (-(k as f64) * q.energy).exp()))
            .collect();
        let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(hi / lo < 1.10, "{hi} {lo}");
    }
}
