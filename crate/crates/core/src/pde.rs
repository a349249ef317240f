//! Transport limits of the ladder: first-order upwind solvers, shape fits, and
//! comparison with the scaled discrete model.
//!
//! PDE1 (Δ > E, both of order one): ∂τf = −(β+δ)f − v∂xf with v = α(e^Δ−e^E)
//! and inflow f(0) = (β/v)∫f.
//! PDE2 (E ≈ 1/N): ∂τf = e^{−x}m − (β+δ)f − w∂xf with w = α(e^Δ−1), f(0) = 0
//! and m = β/(1−e^{−L})·∫f.

use rayon::prelude::*;

use crate::crn::{Degradation, ModelParams};
use crate::error::{invalid, Error, Result};
use crate::finite::{integrate_from, Method, StateVector};
use crate::fit::{log_line_fit, middle, two_exp_fit, LineFit, TwoExpFit};
use crate::output::Table;

pub const CFL: f64 = 0.9;
/// Shape tolerance for the adaptive stop.
pub const SHAPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeKind {
    Pde1,
    Pde2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeParams {
    /// β = e^σ N.
    pub beta: f64,
    /// δ = μN.
    pub loss: f64,
    pub alpha: f64,
    pub energy: f64,
    /// Δ.
    pub delta: f64,
    pub length: f64,
    pub cells: usize,
}

impl PdeParams {
    /// v = α(e^Δ − e^E), the PDE1 transport speed.
    pub fn speed1(&self) -> f64 {
        self.alpha * (self.delta.exp() - self.energy.exp())
    }

    /// w = α(e^Δ − 1), the PDE2 transport speed.
    pub fn speed2(&self) -> f64 {
        self.alpha * self.delta.exp_m1()
    }

    pub fn speed(&self, kind: PdeKind) -> f64 {
        match kind {
            PdeKind::Pde1 => self.speed1(),
            PdeKind::Pde2 => self.speed2(),
        }
    }

    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.cells).map(|i| (i as f64 + 0.5) * h).collect()
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    pub fn validate(&self, kind: PdeKind) -> Result<()> {
        if !(self.beta >= 0.0 && self.loss >= 0.0 && self.beta.is_finite() && self.loss.is_finite()) {
            return Err(invalid("beta", "beta and loss must be finite and nonnegative"));
        }
        if !(self.alpha > 0.0) {
            return Err(invalid("alpha", "must be positive"));
        }
        if !(self.length > 1.0 && self.length.is_finite()) {
            return Err(invalid("length", "must exceed 1"));
        }
        if self.cells < 10 {
            return Err(invalid("cells", "need at least 10 cells"));
        }
        let v = self.speed(kind);
        if !(v > 0.0) {
            return Err(Error::TransportSign(format!(
                "transport speed {v:.6e} is not positive: the lattice drifts toward small k"
            )));
        }
        Ok(())
    }

    /// λ = (β+δ)/v, the PDE1 exponent as printed.
    pub fn lambda1_printed(&self) -> f64 {
        (self.beta + self.loss) / self.speed1()
    }

    /// Exact decay rate of the PDE1 long-time shape: the positive root of
    /// λ = (β/v)(1 − e^{−λL}). It does not depend on δ.
    pub fn lambda1_exact(&self) -> f64 {
        let k = self.beta / self.speed1();
        let mut l = k;
        for _ in 0..200 {
            let next = k * (-(-l * self.length).exp_m1());
            if (next - l).abs() < 1e-16 * l {
                break;
            }
            l = next;
        }
        l
    }

    /// λ = β/(α(e^Δ−1)), the PDE2 exponent.
    pub fn lambda2(&self) -> f64 {
        self.beta / self.speed2()
    }

    /// True when e^Δ > 1 + β/α, where the PDE2 exponent depends on β.
    pub fn pde2_discriminates(&self) -> bool {
        self.delta.exp() > 1.0 + self.beta / self.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeField {
    pub kind: PdeKind,
    pub x: Vec<f64>,
    /// Cell averages.
    pub f: Vec<f64>,
    /// Source amplitude m (PDE2 only).
    pub m: Option<f64>,
    pub tau: f64,
    /// Exponential growth rate of the total mass over the last check interval.
    pub growth: f64,
}

impl PdeField {
    pub fn mass(&self) -> f64 {
        let h = self.x[1] - self.x[0];
        self.f.iter().sum::<f64>() * h
    }

    /// Slope of log f over the middle 60% of the domain.
    pub fn log_slope(&self) -> Result<LineFit> {
        let r = middle(self.x.len(), 0.6);
        log_line_fit(&self.x[r.clone()], &self.f[r])
    }

    /// Fit a·e^{−x} + c·e^{−λx} over the middle 60% of the domain.
    pub fn two_exp(&self) -> Result<TwoExpFit> {
        let r = middle(self.x.len(), 0.6);
        two_exp_fit(&self.x[r.clone()], &self.f[r], 0.01, 5.0)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["x", "f"]);
        for (x, f) in self.x.iter().zip(&self.f) {
            t.push_nums(&[*x, *f]);
        }
        t
    }
}

struct Upwind {
    kind: PdeKind,
    speed: f64,
    decay: f64,
    h: f64,
    dt: f64,
    inflow: f64,
    source: Vec<f64>,
    source_coef: f64,
}

impl Upwind {
    fn new(p: &PdeParams, kind: PdeKind, cfl: f64) -> Result<Self> {
        p.validate(kind)?;
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Cfl(format!("Courant number {cfl} outside (0, 1]")));
        }
        let speed = p.speed(kind);
        let h = p.h();
        let decay = p.beta + p.loss;
        let mut dt = cfl * h / speed;
        // keep the explicit update a convex combination
        if speed * dt / h + decay * dt > 1.0 {
            dt = 1.0 / (speed / h + decay);
        }
        let source: Vec<f64> = (0..p.cells)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                ((-a).exp() - (-b).exp()) / h
            })
            .collect();
        Ok(Upwind {
            kind,
            speed,
            decay,
            h,
            dt,
            inflow: p.beta / speed,
            source,
            source_coef: p.beta / -(-p.length).exp_m1(),
        })
    }

    fn integral(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.h
    }

    fn step(&self, f: &mut [f64], dt: f64) -> Option<f64> {
        let mass = self.integral(f);
        let (boundary, m) = match self.kind {
            PdeKind::Pde1 => (self.inflow * mass, None),
            PdeKind::Pde2 => (0.0, Some(self.source_coef * mass)),
        };
        let c = self.speed * dt / self.h;
        let mut prev = boundary;
        for i in 0..f.len() {
            let cur = f[i];
            let mut next = cur - c * (cur - prev) - dt * self.decay * cur;
            if let Some(m) = m {
                next += dt * m * self.source[i];
            }
            prev = cur;
            f[i] = next;
        }
        m
    }

    /// Advance to `tau` exactly, returning the last m.
    fn advance(&self, f: &mut [f64], tau: f64) -> Option<f64> {
        let mut t = 0.0;
        let mut m = None;
        while t < tau {
            let dt = self.dt.min(tau - t);
            m = self.step(f, dt);
            t += dt;
            if tau - t < 1e-12 * self.dt {
                break;
            }
        }
        m
    }
}

fn field(p: &PdeParams, kind: PdeKind, f: Vec<f64>, tau: f64, growth: f64, scheme: &Upwind) -> PdeField {
    let m = match kind {
        PdeKind::Pde1 => None,
        PdeKind::Pde2 => Some(scheme.source_coef * scheme.integral(&f)),
    };
    PdeField { kind, x: p.centers(), f, m, tau, growth }
}

/// Cell averages of a smooth initial datum with unit integral that satisfies
/// the boundary condition: (β/v)e^{−x} + c·x e^{−x} for PDE1, x e^{−x} for PDE2.
pub fn initial_datum(p: &PdeParams, kind: PdeKind) -> Result<Vec<f64>> {
    p.validate(kind)?;
    let shape = initial_shape(p, kind)?;
    let h = p.h();
    let g = 8;
    Ok((0..p.cells)
        .map(|i| {
            (0..g)
                .map(|j| shape(i as f64 * h + (j as f64 + 0.5) * h / g as f64))
                .sum::<f64>()
                / g as f64
        })
        .collect())
}

/// Pointwise form of `initial_datum`.
pub fn initial_shape(p: &PdeParams, kind: PdeKind) -> Result<impl Fn(f64) -> f64> {
    let l = p.length;
    let e = (-l).exp();
    let i0 = 1.0 - e;
    let i1 = 1.0 - (1.0 + l) * e;
    let (a, c) = match kind {
        PdeKind::Pde1 => {
            let a = p.beta / p.speed1();
            let c = (1.0 - a * i0) / i1;
            if c < 0.0 {
                return Err(invalid("beta", "β/v too large for a nonnegative compatible initial datum"));
            }
            (a, c)
        }
        PdeKind::Pde2 => (0.0, 1.0 / i1),
    };
    Ok(move |x: f64| (a + c * x) * (-x).exp())
}

/// Evolve from `f0` (cell averages) to τ = `tau`.
pub fn solve_from(p: &PdeParams, kind: PdeKind, f0: &[f64], tau: f64) -> Result<PdeField> {
    let s = Upwind::new(p, kind, CFL)?;
    if f0.len() != p.cells {
        return Err(invalid("f0", "length must equal the cell count"));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(invalid("tau", "must be finite and nonnegative"));
    }
    let mut f = f0.to_vec();
    let m0 = s.integral(&f);
    s.advance(&mut f, tau);
    let growth = if tau > 0.0 { (s.integral(&f) / m0).ln() / tau } else { 0.0 };
    Ok(field(p, kind, f, tau, growth, &s))
}

pub fn solve_pde1(p: &PdeParams, tau: f64) -> Result<PdeField> {
    solve_from(p, PdeKind::Pde1, &initial_datum(p, PdeKind::Pde1)?, tau)
}

pub fn solve_pde2(p: &PdeParams, tau: f64) -> Result<PdeField> {
    solve_from(p, PdeKind::Pde2, &initial_datum(p, PdeKind::Pde2)?, tau)
}

/// Run until the normalized profile f/∫f changes by less than `SHAPE_TOL`
/// (max norm, relative to its peak) over a tenth of the transit time L/v.
/// The returned profile has unit integral.
pub fn relax(p: &PdeParams, kind: PdeKind, f0: &[f64]) -> Result<PdeField> {
    let s = Upwind::new(p, kind, CFL)?;
    if f0.len() != p.cells {
        return Err(invalid("f0", "length must equal the cell count"));
    }
    let interval = 0.1 * p.length / s.speed;
    let mut f = f0.to_vec();
    let norm = |f: &mut [f64], s: &Upwind| {
        let m = s.integral(f);
        f.iter_mut().for_each(|v| *v /= m);
        m
    };
    norm(&mut f, &s);
    let mut tau = 0.0;
    let max_tau = 2000.0 * p.length / s.speed;
    loop {
        let prev = f.clone();
        s.advance(&mut f, interval);
        tau += interval;
        let growth = norm(&mut f, &s).ln() / interval;
        let peak = f.iter().fold(0.0f64, |m, v| m.max(*v));
        let change = f.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if change <= SHAPE_TOL * peak {
            return Ok(field(p, kind, f, tau, growth, &s));
        }
        if tau > max_tau {
            return Err(Error::Degenerate(format!(
                "profile shape still changing by {:.3e} at tau = {tau:.1}",
                change / peak
            )));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementRow {
    pub cells: usize,
    pub h: f64,
    pub estimate: f64,
    pub error: f64,
}

/// Long-time exponent at each cell count, with its error against `exact`.
/// PDE1 reports the slope magnitude of log f; PDE2 the two-exponential λ.
pub fn refinement_study(p: &PdeParams, kind: PdeKind, cells: &[usize], exact: f64) -> Result<Vec<RefinementRow>> {
    cells
        .par_iter()
        .map(|&c| {
            let q = p.with_cells(c);
            let fld = relax(&q, kind, &initial_datum(&q, kind)?)?;
            let estimate = match kind {
                PdeKind::Pde1 => -fld.log_slope()?.slope,
                PdeKind::Pde2 => fld.two_exp()?.lambda,
            };
            Ok(RefinementRow { cells: c, h: q.h(), estimate, error: (estimate - exact).abs() })
        })
        .collect()
}

/// Error ratios between successive refinements; first-order upwind gives 1/2.
pub fn refinement_ratios(rows: &[RefinementRow]) -> Vec<f64> {
    rows.windows(2).map(|w| w[1].error / w[0].error).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub n: usize,
    pub gap: f64,
}

/// Discrete parameters matching the PDE scaling at a given N: e^σ = β/N,
/// μ = δ/N, LN sites, and E = 1/N for PDE2.
pub fn discrete_params(p: &PdeParams, kind: PdeKind, n: usize) -> Result<ModelParams> {
    let nf = n as f64;
    let sites = (p.length * nf).round() as usize;
    let energy = match kind {
        PdeKind::Pde1 => p.energy,
        PdeKind::Pde2 => 1.0 / nf,
    };
    if p.loss <= 0.0 {
        return Err(invalid("loss", "the discrete model needs a positive degradation rate"));
    }
    ModelParams::new(sites, p.alpha, p.delta, (p.beta / nf).ln(), energy, Degradation::Rate(p.loss / nf))
}

/// Sup-norm gap between N·n_{⌊Nx⌋}(Nτ) and f(τ, x) on a common grid of interior
/// points, for every N in `n_list`. Both start from the same smooth datum.
pub fn compare_pde_vs_discrete(p: &PdeParams, kind: PdeKind, n_list: &[usize], tau: f64) -> Result<Vec<GapRow>> {
    p.validate(kind)?;
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("n_list", "must be nonempty and increasing"));
    }
    let shape = initial_shape(p, kind)?;
    let pde = solve_from(p, kind, &initial_datum(p, kind)?, tau)?;
    let probe: Vec<f64> = (1..=40).map(|j| p.length * (0.05 + 0.9 * j as f64 / 41.0)).collect();
    let h = p.h();
    let pde_at = |x: f64| {
        let pos = x / h - 0.5;
        let i = (pos.floor().max(0.0) as usize).min(p.cells - 2);
        let w = pos - i as f64;
        (1.0 - w) * pde.f[i] + w * pde.f[i + 1]
    };
    n_list
        .par_iter()
        .map(|&n| {
            let q = discrete_params(p, kind, n)?;
            let nf = n as f64;
            let n0: Vec<f64> = (0..=q.n).map(|k| shape(k as f64 / nf) / nf).collect();
            let start = StateVector { ns: 0.0, n: n0 };
            let states = integrate_from(&q, &start, &[nf * tau], Method::Uniformized)?;
            let s = &states[0];
            let gap = probe
                .iter()
                .map(|&x| {
                    let k = (x * nf).floor() as usize;
                    (nf * s.n[k] - pde_at(x)).abs()
                })
                .fold(0.0f64, f64::max);
            Ok(GapRow { n, gap })
        })
        .collect()
}
