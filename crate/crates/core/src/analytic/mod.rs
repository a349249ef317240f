//! Closed-form quantities and large-`N` predictors.

mod kernel;
mod saddle;

pub use kernel::{LaplaceKernel, BRANCH_TOL};
pub use saddle::{classify_theta_regime, SaddleData, ThetaCase};

use std::fmt;

use crate::crn::ModelParams;
use crate::error::{Error, Result};

/// Tolerance on Δ − Δ_c below which the parameters count as critical.
pub const REGIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}

/// Ω(0) = e^σ + αe^Δ + αe^E.
pub fn omega0(p: &ModelParams) -> f64 {
    p.k_detach() + p.k_phos() + p.k_dephos()
}

/// Roots φ ≤ φ₂ of αφ² − (Ω(0)+s)φ + αe^{Δ+E} = 0 for a real shift s ≥ 0.
///
/// Ω − 2αe^{(Δ+E)/2} = s + e^σ + α(e^{E/2} − e^{Δ/2})² is formed directly so the
/// discriminant never cancels.
pub fn phi_roots_shifted(p: &ModelParams, s: f64) -> (f64, f64) {
    let a = p.alpha;
    let om = s + omega0(p);
    let gap = (0.5 * p.energy).exp() - (0.5 * p.delta).exp();
    let lower = s + p.k_detach() + a * gap * gap;
    let upper = om + 2.0 * a * (0.5 * (p.delta + p.energy)).exp();
    let disc = (lower * upper).sqrt();
    let big = om + disc;
    let phi2 = big / (2.0 * a);
    let phi = 2.0 * a * (p.delta + p.energy).exp() / big;
    (phi, phi2)
}

pub fn phi_roots(p: &ModelParams) -> (f64, f64) {
    phi_roots_shifted(p, 0.0)
}

/// Δ_c(σ) = log(1 + e^σ/(α(e^E − 1))).
pub fn delta_c(alpha: f64, energy: f64, sigma: f64) -> f64 {
    (sigma.exp() / (alpha * energy.exp_m1())).ln_1p()
}

pub fn classify(p: &ModelParams) -> Regime {
    let d = p.delta - delta_c(p.alpha, p.energy, p.sigma);
    if d.abs() <= REGIME_TOL {
        Regime::Critical
    } else if d < 0.0 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}

/// ψ = E − log φ.
pub fn psi(p: &ModelParams) -> f64 {
    p.energy - phi_roots(p).0.ln()
}

/// Decay exponent λ: E below criticality, ψ above.
pub fn lambda(p: &ModelParams) -> f64 {
    match classify(p) {
        Regime::Supercritical => psi(p),
        _ => p.energy,
    }
}

/// Quasi-steady fraction of unbound ligand, e^σ/(e^σ + e^E/(e^E − 1)).
pub fn nbar_s(p: &ModelParams) -> f64 {
    let es = p.k_detach();
    es / (es - 1.0 / (-p.energy).exp_m1())
}

/// −z_A = e^σ − α(e^Δ − 1)(e^E − 1).
fn minus_z_a(p: &ModelParams) -> f64 {
    p.k_detach() - p.alpha * p.delta.exp_m1() * p.energy.exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    pub delta_c: f64,
    pub phi: f64,
    pub phi2: f64,
    pub psi: f64,
    pub lambda: f64,
    pub a0: Option<f64>,
    pub b0: Option<f64>,
    pub g: Option<f64>,
    pub nbar_s: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub regime: Regime,
}

impl AnalyticReport {
    /// Whether G − A(0) and hence C₂ came out positive.
    pub fn c2_positive(&self) -> Option<bool> {
        self.c2.map(|c| c > 0.0)
    }

    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let opt = |x: Option<f64>| x.map_or("NA".to_string(), crate::output::num);
        vec![
            ("regime", self.regime.to_string()),
            ("delta_c", crate::output::num(self.delta_c)),
            ("phi", crate::output::num(self.phi)),
            ("phi2", crate::output::num(self.phi2)),
            ("psi", crate::output::num(self.psi)),
            ("lambda", crate::output::num(self.lambda)),
            ("A0", opt(self.a0)),
            ("B0", opt(self.b0)),
            ("G", opt(self.g)),
            ("nbar_S", crate::output::num(self.nbar_s)),
            ("C1", opt(self.c1)),
            ("C2", opt(self.c2)),
        ]
    }

    pub fn to_key_value(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn csv_header() -> String {
        "regime,delta_c,phi,phi2,psi,lambda,A0,B0,G,nbar_S,C1,C2".into()
    }

    pub fn to_csv_row(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(_, v)| v)
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn compute_report(p: &ModelParams) -> Result<AnalyticReport> {
    p.validate()?;
    let (phi, phi2) = phi_roots(p);
    let regime = classify(p);
    let nbar = nbar_s(p);
    let a = p.alpha;
    let kp = p.k_phos();
    let denom = p.k_detach() + kp - a * phi;

    let (a0, b0, g, c1, c2) = if regime == Regime::Critical {
        (None, None, None, None, None)
    } else {
        let a0 = 1.0 / minus_z_a(p);
        let b0 = -p.k_dephos() * p.delta.exp_m1() / denom;
        let g = (1.0 + a * a0 * (1.0 - phi)) / denom;
        let c1 = 1.0 / (kp * a0 * nbar * (1.0 - phi * (-(p.energy + p.delta)).exp()));
        let c2 = 1.0 / (nbar * kp * (g - a0) * (1.0 - phi * phi * (-(p.energy + p.delta)).exp()));
        (Some(a0), Some(b0), Some(g), Some(c1), Some(c2))
    };

    Ok(AnalyticReport {
        delta_c: delta_c(p.alpha, p.energy, p.sigma),
        phi,
        phi2,
        psi: p.energy - phi.ln(),
        lambda: lambda(p),
        a0,
        b0,
        g,
        nbar_s: nbar,
        c1,
        c2,
        regime,
    })
}

/// σ with λ(σ, E) = b, by bisection on the increasing map σ ↦ E − log φ(σ).
pub fn sigma_c(b: f64, p: &ModelParams) -> Result<f64> {
    let lower = (p.energy - p.delta).max(0.0);
    if !(b > lower) {
        return Err(Error::NoRoot(format!("b = {b} must exceed max(E - delta, 0) = {lower}")));
    }
    if !(b < p.energy) {
        return Err(Error::NoRoot(format!("b = {b} must be below E = {}", p.energy)));
    }
    let f = |s: f64| psi(&p.with_sigma(s)) - b;
    let (mut lo, mut hi) = (-50.0f64, 50.0f64);
    let mut expansions = 0;
    while f(lo) > 0.0 || f(hi) < 0.0 {
        if expansions > 4 {
            return Err(Error::NoRoot(format!("no sign change of lambda - b on [{lo}, {hi}]")));
        }
        if f(lo) > 0.0 {
            lo *= 2.0;
        }
        if f(hi) < 0.0 {
            hi *= 2.0;
        }
        expansions += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    if f(root).abs() > 1e-10 {
        return Err(Error::NoRoot(format!("bisection stalled at sigma = {root}")));
    }
    Ok(root)
}

/// Probability from log-odds ℓ = log(1/p − 1), without overflow.
pub fn pres_from_log_odds(lo: f64) -> f64 {
    if lo > 0.0 {
        let e = (-lo).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + lo.exp())
    }
}

/// Predicted log-odds N(λ − b) + log C.
pub fn asymptotic_log_odds(p: &ModelParams) -> Result<f64> {
    let r = compute_report(p)?;
    let n = p.n as f64;
    let c = match r.regime {
        Regime::Subcritical => r.c1.unwrap(),
        Regime::Supercritical => r.c2.unwrap(),
        Regime::Critical => {
            return Err(Error::UnsupportedRegime(
                "asymptotic formula needs Delta away from Delta_c; use critical_log_odds".into(),
            ))
        }
    };
    if !(c > 0.0) {
        return Err(Error::Degenerate(format!("prefactor C = {c} is not positive")));
    }
    Ok(n * (r.lambda - p.b()) + c.ln())
}

pub fn asymptotic_pres(p: &ModelParams) -> Result<f64> {
    asymptotic_log_odds(p).map(pres_from_log_odds)
}

/// Critical-line prediction: log-odds N(E − b) − log(N n̄_S).
pub fn critical_log_odds(p: &ModelParams) -> f64 {
    let n = p.n as f64;
    n * (p.energy - p.b()) - (n * nbar_s(p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2(delta: f64, sigma: f64) -> ModelParams {
        ModelParams::with_b(20, 1.0, delta, sigma, 3f64.ln(), 2f64.ln()).unwrap()
    }

    #[test]
    fn delta_c_ln2() {
        assert_relative_eq!(delta_c(1.0, 2f64.ln(), 0.0), 2f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn very_negative_sigma() {
        let p = fig2(2.0, -40.0);
        assert!(delta_c(p.alpha, p.energy, p.sigma) <= 1e-17);
        assert_relative_eq!(phi_roots(&p).0, 3.0, max_relative = 1e-12);
        let p = fig2(0.5, -40.0);
        assert_relative_eq!(phi_roots(&p).0, 0.5f64.exp(), max_relative = 1e-12);
    }

    #[test]
    fn exactly_critical() {
        let p = ModelParams::with_b(10, 1.0, 2f64.ln(), 0.0, 2f64.ln(), 0.3).unwrap();
        let r = compute_report(&p).unwrap();
        assert_eq!(r.regime, Regime::Critical);
        assert_relative_eq!(r.phi, 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.psi, 2f64.ln(), max_relative = 1e-13);
        assert!(r.a0.is_none() && r.c2.is_none());
        assert!(matches!(asymptotic_pres(&p), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn supercritical_classification() {
        let r = compute_report(&fig2(2.0, 0.0)).unwrap();
        assert_eq!(r.regime, Regime::Supercritical);
        assert_relative_eq!(r.delta_c, 1.5f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn sigma_c_fig2() {
        let p = fig2(2.0, 0.0);
        let s = sigma_c(2f64.ln(), &p).unwrap();
        // φ = 3/2 solves φ² − Ωφ + e^{Δ+E} = 0 for Ω = 3/2 + 2e²; σ_c = log(Ω − 3 − e²).
        let omega = 1.5 + 3.0 * 2f64.exp() / 1.5;
        let expect = (omega - 3.0 - 2f64.exp()).ln();
        assert_relative_eq!(s, expect, max_relative = 1e-11);
        assert!((s - 1.77293).abs() < 5e-4);
        assert_relative_eq!(phi_roots(&p.with_sigma(s)).0, 1.5, max_relative = 1e-10);
    }

    #[test]
    fn sigma_c_bounds() {
        let p = fig2(2.0, 0.0);
        assert!(matches!(sigma_c(p.energy, &p), Err(Error::NoRoot(_))));
        let p = fig2(0.5, 0.0);
        assert!(matches!(sigma_c(p.energy - 0.5, &p), Err(Error::NoRoot(_))));
    }

    #[test]
    fn asymptotic_examples() {
        assert!(asymptotic_pres(&fig2(0.1, 0.0)).unwrap() < 0.05);
        let p = ModelParams::with_b(40, 1.0, 0.1, 0.0, 2f64.ln(), 3f64.ln()).unwrap();
        assert!(asymptotic_pres(&p).unwrap() > 0.95);
        let p = fig2(2.0, 0.0);
        let s = sigma_c(2f64.ln(), &p).unwrap();
        let p = p.with_sigma(s);
        let c2 = compute_report(&p).unwrap().c2.unwrap();
        assert_relative_eq!(asymptotic_pres(&p).unwrap(), 1.0 / (1.0 + c2), max_relative = 1e-8);
    }

    #[test]
    fn g_minus_a_equals_b_times_a() {
        for &(d, s) in &[(2.0, 0.0), (0.1, 0.0), (3.0, 1.0), (0.4, -1.0)] {
            let r = compute_report(&fig2(d, s)).unwrap();
            let (a, b, g) = (r.a0.unwrap(), r.b0.unwrap(), r.g.unwrap());
            assert_relative_eq!(g - a, b * a, max_relative = 1e-10);
        }
    }

    #[test]
    fn psi_large_delta() {
        // phi tends to e^E, so psi loses its sigma dependence and tends to zero
        let a = psi(&fig2(30.0, 0.5));
        let b = psi(&fig2(30.0, -1.0));
        assert!(a.abs() < 1e-8 && b.abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn report_serialization() {
        let r = compute_report(&fig2(2.0, 0.0)).unwrap();
        let kv = r.to_key_value();
        assert!(kv.starts_with("regime=supercritical\n"));
        assert_eq!(
            AnalyticReport::csv_header().split(',').count(),
            r.to_csv_row().split(',').count()
        );
    }
}
