use crate::crn::ModelParams;
use crate::error::{Error, Result};

use super::{classify, Regime};

/// Position of w_θ = √(1+θ²) relative to the poles w_S < w_0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaCase {
    /// w_S < w_θ < w_0.
    Case1,
    /// w_θ < w_S.
    Case2,
    /// w_θ > w_0.
    Case3,
}

/// Saddle-point variables for the ray k = θτ.
#[derive(Debug, Clone, Copy)]
pub struct SaddleData {
    pub theta: f64,
    pub half_sum: f64,
    pub w0: f64,
    pub w_s: f64,
    pub w_a: f64,
    pub w_theta: f64,
    pub theta_m: f64,
    time_scale: f64,
}

impl SaddleData {
    pub fn new(p: &ModelParams, theta: f64) -> Self {
        let h = 0.5 * (p.energy + p.delta);
        let ch = (0.5 * (p.energy - p.delta)).cosh();
        let pre = (-h).exp() / (2.0 * p.alpha);
        SaddleData {
            theta,
            half_sum: h,
            w0: pre * p.k_detach() + ch,
            w_s: -pre / -(-p.energy).exp_m1() + ch,
            w_a: h.cosh(),
            w_theta: (1.0 + theta * theta).sqrt(),
            theta_m: h.sinh(),
            time_scale: 2.0 * p.alpha * h.exp(),
        }
    }

    /// τ = 2αe^{(E+Δ)/2} t.
    pub fn tau(&self, t: f64) -> f64 {
        self.time_scale * t
    }

    /// t for a given τ.
    pub fn time(&self, tau: f64) -> f64 {
        tau / self.time_scale
    }

    /// Φ(w) = w − θ log(w + √(w²−1)) for real w ≥ 1.
    pub fn big_phi(&self, w: f64) -> f64 {
        w - self.theta * w.acosh()
    }

    /// Ψ_M(θ) = Φ_θ(w_θ) + θ(E+Δ)/2.
    pub fn psi_m(&self, theta: f64) -> f64 {
        let wt = (1.0 + theta * theta).sqrt();
        wt - theta * wt.acosh() + theta * self.half_sum
    }

    /// φ as a function of w: e^{(E+Δ)/2}/(w + √(w²−1)).
    pub fn varphi_of_w(&self, w: f64) -> f64 {
        self.half_sum.exp() / (w + (w * w - 1.0).sqrt())
    }
}

/// Which of the three orderings of w_θ, w_S, w_0 holds.
pub fn classify_theta_regime(theta: f64, p: &ModelParams) -> Result<ThetaCase> {
    if classify(p) != Regime::Supercritical {
        return Err(Error::UnsupportedRegime("theta cases need supercritical parameters".into()));
    }
    if !(theta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: "must be nonnegative".into(),
        });
    }
    let s = SaddleData::new(p, theta);
    let tie = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs());
    if tie(s.w_theta, s.w_s) || tie(s.w_theta, s.w0) {
        return Err(Error::Ambiguous(format!("w_theta = {} ties a pole", s.w_theta)));
    }
    Ok(if s.w_theta < s.w_s {
        ThetaCase::Case2
    } else if s.w_theta < s.w0 {
        ThetaCase::Case1
    } else {
        ThetaCase::Case3
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(delta: f64, sigma: f64) -> ModelParams {
        ModelParams::with_b(5, 1.0, delta, sigma, 3f64.ln(), 0.3).unwrap()
    }

    #[test]
    fn stationary_point_of_phi() {
        let s = SaddleData::new(&p(2.0, 0.0), 0.7);
        let h = 1e-3;
        let f = |k: f64| s.big_phi(s.w_theta + k * h);
        let d = (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h);
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn psi_m_max() {
        let s = SaddleData::new(&p(2.0, 0.0), 0.0);
        let top = s.psi_m(s.theta_m);
        assert!((top - s.half_sum.cosh()).abs() < 1e-12);
        for i in 0..200 {
            let th = 0.02 * i as f64;
            assert!(s.psi_m(th) <= top + 1e-12);
        }
    }

    #[test]
    fn cases() {
        let q = p(2.0, 1.77293);
        let s0 = SaddleData::new(&q, 0.0);
        assert_eq!(s0.w_theta, 1.0);
        let expect0 = if 1.0 < s0.w_s { ThetaCase::Case2 } else { ThetaCase::Case1 };
        assert_eq!(classify_theta_regime(0.0, &q).unwrap(), expect0);
        assert_eq!(classify_theta_regime(1e3, &q).unwrap(), ThetaCase::Case3);
        let s = SaddleData::new(&q, 0.5);
        let direct = if s.w_theta < s.w_s {
            ThetaCase::Case2
        } else if s.w_theta < s.w0 {
            ThetaCase::Case1
        } else {
            ThetaCase::Case3
        };
        assert_eq!(classify_theta_regime(0.5, &q).unwrap(), direct);
        assert!(classify_theta_regime(0.5, &p(0.1, 0.0)).is_err());
    }

    #[test]
    fn varphi_w_matches_kernel_at_zero() {
        let q = p(2.0, 0.0);
        let s = SaddleData::new(&q, 0.0);
        let (phi, _) = crate::analytic::phi_roots(&q);
        // z = 0 maps to w_0.
        assert!((s.varphi_of_w(s.w0) - phi).abs() < 1e-12 * phi);
    }
}
