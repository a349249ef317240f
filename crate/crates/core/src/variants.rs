//! Alternative placements of Δ in the ladder, and the Δ → ∞ limit with αe^Δ = γ fixed.
//!
//! Each variant is a birth-death chain driven by a fixed free-ligand level
//! ñ_S = 1, so the stationary profile solves one tridiagonal system.

use rayon::prelude::*;

use crate::crn::ModelParams;
use crate::error::{invalid, Error, Result};
use crate::fit::{log_line_fit, LineFit};
use crate::linalg::thomas;
use crate::output::Table;

/// σ step of the sensitivity stencil.
pub const SIGMA_STEP: f64 = 0.5;
/// Smallest exponent change counted as σ-sensitive, whatever the fit error.
pub const SENSITIVITY_FLOOR: f64 = 1e-3;
pub const MIN_TRUNCATION: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariantKind {
    /// Detachment from C_k at e^{σ+kΔ}.
    Detachment,
    /// Attachment to C_k at e^{−k(E+Δ)}.
    Attachment,
    /// Dephosphorylation at αe^{E−Δ}.
    Dephosphorylation,
    /// Phosphorylation at γ and dephosphorylation at γe^{E−Δ}; the `alpha` of
    /// the params is ignored and Δ should be large.
    DeltaInfty { gamma: f64 },
}

impl VariantKind {
    pub fn name(&self) -> &'static str {
        match self {
            VariantKind::Detachment => "detachment",
            VariantKind::Attachment => "attachment",
            VariantKind::Dephosphorylation => "dephosphorylation",
            VariantKind::DeltaInfty { .. } => "delta_infty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantSpec {
    pub kind: VariantKind,
    /// N and the degradation are unused.
    pub params: ModelParams,
    pub truncation: usize,
}

impl VariantSpec {
    pub fn new(kind: VariantKind, params: ModelParams, truncation: usize) -> Result<Self> {
        let s = VariantSpec { kind, params, truncation };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.truncation < MIN_TRUNCATION {
            return Err(invalid("truncation", format!("K must be at least {MIN_TRUNCATION}")));
        }
        if let VariantKind::DeltaInfty { gamma } = self.kind {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(invalid("gamma", "must be positive and finite"));
            }
        }
        Ok(())
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.params.sigma = sigma;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.params.delta = delta;
        self
    }

    pub fn with_truncation(mut self, k: usize) -> Self {
        self.truncation = k;
        self
    }

    /// (source_k, detach_k) for site k, plus the forward and backward rates.
    fn rates(&self) -> (Vec<f64>, Vec<f64>, f64, f64) {
        let p = &self.params;
        let (a, e, d, s) = (p.alpha, p.energy, p.delta, p.sigma);
        let ks = 0..=self.truncation;
        match self.kind {
            VariantKind::Detachment => (
                ks.clone().map(|k| (-(k as f64) * e).exp()).collect(),
                ks.map(|k| (s + k as f64 * d).exp()).collect(),
                a,
                a * e.exp(),
            ),
            VariantKind::Attachment => (
                ks.clone().map(|k| (-(k as f64) * (e + d)).exp()).collect(),
                ks.map(|_| s.exp()).collect(),
                a,
                a * e.exp(),
            ),
            VariantKind::Dephosphorylation => (
                ks.clone().map(|k| (-(k as f64) * e).exp()).collect(),
                ks.map(|_| s.exp()).collect(),
                a,
                a * (e - d).exp(),
            ),
            VariantKind::DeltaInfty { gamma } => (
                ks.clone().map(|k| (-(k as f64) * e).exp()).collect(),
                ks.map(|_| s.exp()).collect(),
                gamma,
                gamma * (e - d).exp(),
            ),
        }
    }
}

/// Stationary ñ_0..ñ_K relative to ñ_S, with ñ_{K+1} = 0.
pub fn variant_steady_profile(spec: &VariantSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let (src, det, fw, bw) = spec.rates();
    let m = spec.truncation + 1;
    let diag: Vec<f64> = (0..m)
        .map(|k| det[k] + fw + if k >= 1 { bw } else { 0.0 })
        .collect();
    let upper = vec![-bw; m - 1];
    let lower = vec![-fw; m - 1];
    let x = thomas(&lower, &diag, &upper, &src)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("stationary system is singular or overflows".into()));
    }
    Ok(x)
}

pub fn profile_table(profile: &[f64]) -> Table {
    let mut t = Table::new(&["k", "n"]);
    for (k, v) in profile.iter().enumerate() {
        t.push_nums(&[k as f64, *v]);
    }
    t
}

/// Fit window k ∈ [K/4, 3K/4].
pub fn fit_window(k: usize) -> std::ops::RangeInclusive<usize> {
    k / 4..=3 * k / 4
}

/// Least-squares fit of log ñ_k over the fit window, after multiplying by e^{kc}.
pub fn fit_profile(profile: &[f64], scale: f64) -> Result<LineFit> {
    let r = fit_window(profile.len() - 1);
    let x: Vec<f64> = r.clone().map(|k| k as f64).collect();
    let y: Vec<f64> = r.map(|k| profile[k] * (k as f64 * scale).exp()).collect();
    log_line_fit(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantExponent {
    /// Decay rate λ with ñ_k ≈ e^{−λk}.
    pub lambda: f64,
    pub slope_se: f64,
    /// Largest |λ(σ±0.5) − λ(σ)|.
    pub spread: f64,
    pub sigma_sensitive: bool,
}

fn lambda_of(spec: &VariantSpec) -> Result<LineFit> {
    fit_profile(&variant_steady_profile(spec)?, 0.0)
}

/// Fitted decay rate and the σ-sensitivity flag: the exponent at σ ± 0.5
/// moves by more than max(5·SE, SENSITIVITY_FLOOR).
pub fn variant_exponent(spec: &VariantSpec) -> Result<VariantExponent> {
    let s = spec.params.sigma;
    let fits: Vec<LineFit> = [s, s - SIGMA_STEP, s + SIGMA_STEP]
        .par_iter()
        .map(|&sig| lambda_of(&spec.with_sigma(sig)))
        .collect::<Result<_>>()?;
    let lambda = -fits[0].slope;
    let spread = fits[1..].iter().map(|f| (-f.slope - lambda).abs()).fold(0.0, f64::max);
    let threshold = (5.0 * fits[0].slope_se).max(SENSITIVITY_FLOOR);
    Ok(VariantExponent {
        lambda,
        slope_se: fits[0].slope_se,
        spread,
        sigma_sensitive: spread > threshold,
    })
}

fn lower_root(b: f64, c: f64) -> f64 {
    // smaller root of g² − b g + c = 0, written without cancellation
    2.0 * c / (b + (b * b - 4.0 * c).sqrt())
}

/// g(σ) for the attachment variant.
pub fn g_attachment(p: &ModelParams) -> f64 {
    let e = p.energy;
    let b = 1.0 + (p.sigma - e).exp() / p.alpha + (-e).exp();
    lower_root(b, (-e).exp())
}

/// Critical Δ of the attachment variant, where g(σ)e^{E+Δ} = 1.
pub fn delta_c_attachment(p: &ModelParams) -> f64 {
    -g_attachment(p).ln() - p.energy
}

/// g(σ) for the dephosphorylation variant.
pub fn g_dephosphorylation(p: &ModelParams) -> f64 {
    let q = (p.delta - p.energy).exp();
    let b = 1.0 + q + (p.sigma + p.delta - p.energy).exp() / p.alpha;
    lower_root(b, q)
}

/// x = e^{σ−E}/(α(1−e^{−E})); a critical Δ exists only for x < 1.
pub fn dephosphorylation_x(p: &ModelParams) -> f64 {
    (p.sigma - p.energy).exp() / (p.alpha * -(-p.energy).exp_m1())
}

/// Δ_c = −log(1 − x) for the dephosphorylation variant, or None when x ≥ 1.
pub fn delta_c_dephosphorylation(p: &ModelParams) -> Option<f64> {
    let x = dephosphorylation_x(p);
    (x < 1.0).then(|| -(-x).ln_1p())
}

/// Limit of φ(σ) as Δ → ∞ with αe^Δ = γ: e^E/(1 + e^σ/γ).
pub fn delta_infty_phi(sigma: f64, gamma: f64, energy: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    Ok(energy.exp() / (1.0 + (sigma - gamma.ln()).exp()))
}

/// Limiting decay rate min(E, log(1 + e^σ/γ)).
pub fn delta_infty_lambda(sigma: f64, gamma: f64, energy: f64) -> f64 {
    energy.min((sigma - gamma.ln()).exp().ln_1p())
}

/// The limiting model discriminates when log(1 + e^σ/γ) < E.
pub fn delta_infty_discriminates(sigma: f64, gamma: f64, energy: f64) -> bool {
    (sigma - gamma.ln()).exp().ln_1p() < energy
}

/// log(ψ⁺_{k+1}/ψ⁺_k) for the growing homogeneous solution of the detachment
/// variant, k = 1..=k_max, from ψ⁺_0 = ψ⁺_1 = 1. Its increments tend to Δ,
/// so log ψ⁺_k grows like k²Δ/2.
pub fn detachment_growth_ratios(p: &ModelParams, k_max: usize) -> Vec<f64> {
    let (a, ae) = (p.alpha, p.alpha * p.energy.exp());
    let mut r = 1.0f64;
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let c = (p.sigma + k as f64 * p.delta).exp() + a + ae;
        r = (c - a / r) / ae;
        out.push(r.ln());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::phi_roots;

    fn mp(delta: f64, sigma: f64) -> ModelParams {
        ModelParams::with_b(10, 1.0, delta, sigma, 3f64.ln(), 0.5).unwrap()
    }

    fn spec(kind: VariantKind, delta: f64, sigma: f64, k: usize) -> VariantSpec {
        VariantSpec::new(kind, mp(delta, sigma), k).unwrap()
    }

    #[test]
    fn detachment_profile_is_flat_after_rescaling() {
        for d in [0.5, 1.0, 2.0] {
            let s = spec(VariantKind::Detachment, d, 0.3, 60);
            let prof = variant_steady_profile(&s).unwrap();
            let fit = fit_profile(&prof, s.params.energy + d).unwrap();
            assert!(fit.slope.abs() <= 0.01, "{d}: {}", fit.slope);
            assert!(!variant_exponent(&s).unwrap().sigma_sensitive);
        }
    }

    #[test]
    fn attachment_exponents_on_both_sides() {
        for sigma in [-1.0, 0.0, 1.0] {
            let dc = delta_c_attachment(&mp(0.0, sigma));
            let sup = spec(VariantKind::Attachment, dc + 0.5, sigma, 200);
            let g = g_attachment(&sup.params);
            let e = variant_exponent(&sup).unwrap();
            assert!((e.lambda / -g.ln() - 1.0).abs() < 0.02);
            assert!(e.sigma_sensitive);
            let d = (dc - 0.5).max(0.01);
            let sub = spec(VariantKind::Attachment, d, sigma, 200);
            let e = variant_exponent(&sub).unwrap();
            assert!((e.lambda / (sub.params.energy + d) - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn dephosphorylation_flips_at_critical_delta() {
        let base = mp(0.0, -1.0);
        let dc = delta_c_dephosphorylation(&base).unwrap();
        let below = variant_exponent(&spec(VariantKind::Dephosphorylation, dc - 0.2, -1.0, 200)).unwrap();
        let above = variant_exponent(&spec(VariantKind::Dephosphorylation, dc + 0.2, -1.0, 200)).unwrap();
        assert!(!below.sigma_sensitive, "{below:?}");
        assert!(above.sigma_sensitive, "{above:?}");
        let far = spec(VariantKind::Dephosphorylation, dc + 1.0, -1.0, 200);
        let g = g_dephosphorylation(&far.params);
        assert!((variant_exponent(&far).unwrap().lambda / -g.ln() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dephosphorylation_without_critical_delta() {
        // x = 3: no Δ makes the exponent depend on σ
        let e = 3f64.ln();
        let sigma = e + (3.0 * -(-e).exp_m1()).ln();
        assert!((dephosphorylation_x(&mp(0.0, sigma)) - 3.0).abs() < 1e-12);
        assert!(delta_c_dephosphorylation(&mp(0.0, sigma)).is_none());
        for i in 0..=20 {
            let d = 0.5 * i as f64;
            let r = variant_exponent(&spec(VariantKind::Dephosphorylation, d, sigma, 200)).unwrap();
            assert!(!r.sigma_sensitive, "Δ = {d}: {r:?}");
        }
    }

    #[test]
    fn delta_infty_limit() {
        for &(sigma, gamma) in &[(0.0, 1.0), (1.0, 0.5), (-2.0, 3.0)] {
            let delta: f64 = 25.0;
            let p = ModelParams::with_b(10, gamma * (-delta).exp(), delta, sigma, 3f64.ln(), 0.5).unwrap();
            let full = phi_roots(&p).0;
            let lim = delta_infty_phi(sigma, gamma, p.energy).unwrap();
            assert!((full - lim).abs() < 1e-6);
            let s = VariantSpec::new(VariantKind::DeltaInfty { gamma }, p, 200).unwrap();
            let lam = variant_exponent(&s).unwrap().lambda;
            assert!((lam - delta_infty_lambda(sigma, gamma, p.energy)).abs() < 1e-3);
        }
        assert!(delta_infty_phi(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn delta_infty_criterion_matches_delta_c() {
        let e = 2f64.ln();
        for i in 0..25 {
            for j in 0..5 {
                let sigma = -3.0 + 0.25 * i as f64;
                let gamma = 0.5 + 0.6 * j as f64;
                let delta: f64 = 25.0;
                let p = ModelParams::with_b(10, gamma * (-delta).exp(), delta, sigma, e, 0.5).unwrap();
                let margin = delta - crate::analytic::delta_c(p.alpha, e, sigma);
                if margin.abs() > 1e-6 {
                    assert_eq!(margin > 0.0, delta_infty_discriminates(sigma, gamma, e));
                }
            }
        }
        for sigma in [-5.0, 0.0, 5.0, 20.0] {
            assert!(delta_infty_discriminates(sigma, 1.0, 40.0));
        }
    }

    #[test]
    fn growing_homogeneous_solution() {
        let p = mp(0.7, 0.2);
        let r = detachment_growth_ratios(&p, 40);
        for k in 30..39 {
            assert!((r[k + 1] - r[k] - 0.7).abs() < 1e-6);
        }
    }

    #[test]
    fn profiles_nonnegative_and_eventually_decreasing() {
        for kind in [VariantKind::Detachment, VariantKind::Attachment, VariantKind::Dephosphorylation] {
            for d in [0.2, 1.0, 2.5] {
                let prof = variant_steady_profile(&spec(kind, d, 0.0, 60)).unwrap();
                assert!(prof.iter().all(|v| *v >= 0.0));
                assert!(prof[5..].windows(2).all(|w| w[1] < w[0]), "{kind:?} {d}");
            }
        }
    }

    #[test]
    fn short_truncation_rejected() {
        assert!(VariantSpec::new(VariantKind::Attachment, mp(1.0, 0.0), 20).is_err());
    }
}
