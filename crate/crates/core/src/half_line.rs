//! The N = ∞ ladder: truncated-lattice integration, the closed-form Laplace
//! solution, Talbot inversion and the long-time limits along rays k = θτ.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{classify, compute_report, phi_roots, Regime, SaddleData, ThetaCase, LaplaceKernel};
use crate::crn::ModelParams;
use crate::error::{Error, Result};
use crate::linalg::uniformized_expmv;
use crate::output::{num, Table};

/// Tail mass on the last ten sites above which a run is declared truncated.
pub const TAIL_TOL: f64 = 1e-10;

/// State of the truncated half-line lattice at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineRun {
    pub k_max: usize,
    pub t: f64,
    pub ns: f64,
    /// n_0 … n_K.
    pub n: Vec<f64>,
    pub theta_targets: Vec<f64>,
}

impl HalfLineRun {
    pub fn mass(&self) -> f64 {
        self.ns + self.n.iter().sum::<f64>()
    }
}

struct Lattice {
    k_max: usize,
    s_out: f64,
    detach: f64,
    kp: f64,
    km: f64,
    attach: Vec<f64>,
}

impl Lattice {
    fn new(p: &ModelParams, k_max: usize) -> Self {
        Lattice {
            k_max,
            s_out: 1.0 / -(-p.energy).exp_m1(),
            detach: p.k_detach(),
            kp: p.k_phos(),
            km: p.k_dephos(),
            attach: (0..=k_max).map(|k| p.k_attach(k)).collect(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let kk = self.k_max;
        let xs = x[0];
        let c = &x[1..];
        y[0] = -self.s_out * xs + self.detach * c.iter().sum::<f64>();
        for k in 0..=kk {
            let mut v = self.attach[k] * xs - (self.detach + self.kp + if k > 0 { self.km } else { 0.0 }) * c[k];
            if k > 0 {
                v += self.kp * c[k - 1];
            }
            if k < kk {
                v += self.km * c[k + 1];
            }
            y[k + 1] = v;
        }
    }

    fn max_rate(&self) -> f64 {
        self.s_out.max(self.detach + self.kp + self.km)
    }

    fn dense(&self) -> nalgebra::DMatrix<f64> {
        let d = self.k_max + 2;
        let mut a = nalgebra::DMatrix::zeros(d, d);
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; d];
        for j in 0..d {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.apply(&e, &mut col);
            for i in 0..d {
                a[(i, j)] = col[i];
            }
        }
        a
    }
}

/// A truncation that contains the ballistic front and the rays up to θ_max.
pub fn auto_truncation(p: &ModelParams, t: f64, theta_max: f64) -> usize {
    let s = SaddleData::new(p, theta_max);
    let tau = s.tau(t);
    let drift = p.alpha * (p.delta.exp() - p.energy.exp()).max(0.0) * t;
    let spread = (p.alpha * (p.delta.exp() + p.energy.exp()) * t).sqrt();
    let k = (3.0 * theta_max * tau).max(3.0 * drift + 8.0 * spread).max(60.0);
    k.ceil() as usize + 20
}

/// Integrate the lattice to time t from all mass on S.
pub fn integrate_halfline(p: &ModelParams, t: f64, k_max: usize) -> Result<HalfLineRun> {
    p.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "must be finite and nonnegative".into(),
        });
    }
    if k_max < 20 {
        return Err(Error::Truncation(format!("K = {k_max} is below the minimum of 20")));
    }
    let lat = Lattice::new(p, k_max);
    let mut v = vec![0.0; k_max + 2];
    v[0] = 1.0;
    let x = uniformized_expmv(|a, b| lat.apply(a, b), lat.max_rate(), t, &v);
    let tail: f64 = x[k_max + 1 - 10..].iter().sum();
    if tail > TAIL_TOL {
        return Err(Error::Truncation(format!(
            "mass {tail:.3e} within 10 sites of K = {k_max} at t = {t}"
        )));
    }
    Ok(HalfLineRun {
        k_max,
        t,
        ns: x[0],
        n: x[1..].to_vec(),
        theta_targets: Vec::new(),
    })
}

/// Dense generator of the truncated lattice, for oracle comparisons.
pub fn lattice_matrix(p: &ModelParams, k_max: usize) -> nalgebra::DMatrix<f64> {
    Lattice::new(p, k_max).dense()
}

/// n̂_k(z) from the explicit Laplace solution.
pub fn closed_form_nk_hat(k: usize, z: Complex64, p: &ModelParams) -> Result<Complex64> {
    LaplaceKernel::new(p).nk_hat(k, z)
}

fn talbot_sum(k: usize, t: f64, kern: &LaplaceKernel, m: usize) -> Result<f64> {
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut acc = 0.5 * (kern.nk_hat(k, Complex64::new(r, 0.0))? * (r * t).exp()).re;
    for j in 1..m {
        let th = j as f64 * std::f64::consts::PI / m as f64;
        let cot = th.cos() / th.sin();
        let z = Complex64::new(r * th * cot, r * th);
        let sig = th + (th * cot - 1.0) * cot;
        let term = (z * t).exp() * kern.nk_hat(k, z)? * Complex64::new(1.0, sig);
        acc += term.re;
    }
    Ok(acc * r / m as f64)
}

/// Node count for the Talbot quadrature; the check uses `TALBOT_M - 8`.
pub const TALBOT_M: usize = 32;

/// n_k(t) by fixed-Talbot inversion, checked against a lower-order rule.
pub fn talbot_invert(k: usize, t: f64, p: &ModelParams) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "must be positive".into(),
        });
    }
    let kern = LaplaceKernel::new(p);
    let hi = talbot_sum(k, t, &kern, TALBOT_M)?;
    let lo = talbot_sum(k, t, &kern, TALBOT_M - 8)?;
    let tol = 1e-7 * hi.abs() + 1e-13;
    if (hi - lo).abs() > tol || !hi.is_finite() {
        return Err(Error::Inversion(format!(
            "orders {} and {} give {lo:e} and {hi:e} for k = {k}, t = {t}",
            TALBOT_M - 8,
            TALBOT_M
        )));
    }
    Ok(hi)
}

/// Stationary value lim n_k(t), the residue of n̂_k at z = 0.
pub fn residue_at_zero(k: usize, p: &ModelParams) -> Result<f64> {
    // z·n̂_k(z) is analytic at 0; average it on a small circle.
    let kern = LaplaceKernel::new(p);
    let h = 1e-4;
    let m = 16;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let z = Complex64::from_polar(h, 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64);
        acc += z * kern.nk_hat(k, z)?;
    }
    Ok(acc.re / m as f64)
}

/// What the ratio along k = ⌊θτ⌋ is measured against, and its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayTarget {
    pub regime: Regime,
    pub case: Option<ThetaCase>,
    /// n_k is divided by e^{k·log_scale}.
    pub log_scale: f64,
    pub limit: f64,
}

pub fn ray_target(theta: f64, p: &ModelParams) -> Result<RayTarget> {
    let regime = classify(p);
    let nbar = crate::analytic::nbar_s(p);
    let e = p.energy;
    Ok(match regime {
        Regime::Subcritical => {
            let r = compute_report(p)?;
            RayTarget { regime, case: None, log_scale: -e, limit: r.a0.unwrap() * nbar }
        }
        Regime::Critical => RayTarget {
            regime,
            case: None,
            log_scale: -e,
            limit: nbar * (1.0 - 1.0 / (2.0 * p.k_dephos())),
        },
        Regime::Supercritical => {
            let case = crate::analytic::classify_theta_regime(theta, p)?;
            match case {
                ThetaCase::Case2 => {
                    let r = compute_report(p)?;
                    RayTarget {
                        regime,
                        case: Some(case),
                        log_scale: phi_roots(p).0.ln() - e,
                        limit: r.a0.unwrap() * r.b0.unwrap() * nbar,
                    }
                }
                _ => {
                    let s = SaddleData::new(p, theta);
                    RayTarget {
                        regime,
                        case: Some(case),
                        log_scale: s.varphi_of_w(s.w_theta).ln() - e,
                        limit: 0.0,
                    }
                }
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub theta: f64,
    pub tau: f64,
    pub k: usize,
    pub ratio: f64,
    /// |ratio − limit|, relative to the limit when it is nonzero.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub target: RayTarget,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn gaps_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].gap < w[0].gap)
    }

    pub fn final_gap(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.gap)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["theta", "tau", "k", "ratio", "gap"]);
        for r in &self.rows {
            t.push(vec![num(r.theta), num(r.tau), r.k.to_string(), num(r.ratio), num(r.gap)]);
        }
        t
    }
}

/// Default τ ladder.
pub const TAU_LADDER: [f64; 3] = [40.0, 80.0, 160.0];

/// Ratio n_k(t)/scale along k = ⌊θτ⌋ for each τ, against the predicted limit.
pub fn verify_theorem_5(theta: f64, taus: &[f64], p: &ModelParams) -> Result<ConvergenceTable> {
    let target = ray_target(theta, p)?;
    let sd = SaddleData::new(p, theta);
    let rows: Vec<Result<ConvergenceRow>> = taus
        .par_iter()
        .map(|&tau| {
            let t = sd.time(tau);
            let k = (theta * tau).floor() as usize;
            let kmax = auto_truncation(p, t, theta).max(k + 40);
            let run = integrate_halfline(p, t, kmax)?;
            let ratio = run.n[k] * (-(k as f64) * target.log_scale).exp();
            let gap = if target.limit == 0.0 {
                ratio.abs()
            } else {
                ((ratio - target.limit) / target.limit).abs()
            };
            Ok(ConvergenceRow { theta, tau, k, ratio, gap })
        })
        .collect();
    Ok(ConvergenceTable {
        target,
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

/// Location of the half maximum of e^{kE}n_k beyond its peak.
pub fn front_position(run: &HalfLineRun, energy: f64) -> usize {
    let w: Vec<f64> = run
        .n
        .iter()
        .enumerate()
        .map(|(k, v)| v.ln() + k as f64 * energy)
        .collect();
    let (peak, top) = w
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let half = top - 2f64.ln();
    (peak..w.len()).find(|&k| w[k] < half).unwrap_or(w.len())
}
