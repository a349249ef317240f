//! Detailed-balance-complete network with ATP, ADP and free phosphate.
//!
//! Species are ordered C_0..C_N, ATP, ADP, P, S. Reactions:
//! C_k + ATP ⇄ C_{k+1} + ADP (k < N), ATP ⇄ ADP + P and C_k ⇄ S + kP.

use nalgebra::DMatrix;

use crate::crn::{complex, NetworkSpec, Reaction, ADP, ATP, DEGRADED, FREE, OUTPUT, PHOSPHATE};
use crate::crn::ModelParams;
use crate::error::{invalid, Error, Result};
use crate::output::{num, Table};
use crate::stiff::{OdeSystem, Sdirk2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnlargedParams {
    pub n: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub energy: f64,
    pub e_t: f64,
    pub e_d: f64,
    pub e_p: f64,
}

impl EnlargedParams {
    /// Takes N, α, σ, E from `base`; its Δ and degradation are not used.
    pub fn from_base(base: &ModelParams, e_t: f64, e_d: f64, e_p: f64) -> Result<Self> {
        let p = EnlargedParams {
            n: base.n,
            alpha: base.alpha,
            sigma: base.sigma,
            energy: base.energy,
            e_t,
            e_d,
            e_p,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("n", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive and finite"));
        }
        if !(self.energy > 0.0 && self.energy.is_finite()) {
            return Err(invalid("energy", "must be positive and finite"));
        }
        for (name, v) in [("sigma", self.sigma), ("e_t", self.e_t), ("e_d", self.e_d), ("e_p", self.e_p)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n + 5
    }

    fn rates(&self) -> Rates {
        Rates {
            r1f: self.alpha * self.e_t.exp(),
            r1b: self.alpha * (self.energy + self.e_d).exp(),
            r2f: self.e_t.exp(),
            r2b: (self.e_d + self.e_p).exp(),
            r3f: self.sigma.exp(),
            r3b_log: self.e_p - self.energy,
        }
    }

    /// Energy vector (σ, σ+E, …, σ+NE, E_T, E_D, E_P, E_S).
    pub fn energy_vector(&self, e_s: f64) -> Vec<f64> {
        let mut v: Vec<f64> = (0..=self.n).map(|k| self.sigma + k as f64 * self.energy).collect();
        v.extend([self.e_t, self.e_d, self.e_p, e_s]);
        v
    }

    /// The detailed-balance equilibrium e^{−𝐄}, with free ligand at energy 0.
    pub fn equilibrium(&self) -> EnlargedState {
        EnlargedState::from_slice(&self.energy_vector(0.0).iter().map(|e| (-e).exp()).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, Copy)]
struct Rates {
    r1f: f64,
    r1b: f64,
    r2f: f64,
    r2b: f64,
    r3f: f64,
    r3b_log: f64,
}

impl Rates {
    fn r3b(&self, k: usize) -> f64 {
        (k as f64 * self.r3b_log).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Totals {
    pub ligands: f64,
    pub phosphates: f64,
    pub nucleotides: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnlargedState {
    pub n: Vec<f64>,
    pub n_t: f64,
    pub n_d: f64,
    pub n_p: f64,
    pub n_s: f64,
}

impl EnlargedState {
    pub fn from_slice(x: &[f64]) -> Self {
        let m = x.len() - 4;
        EnlargedState {
            n: x[..m].to_vec(),
            n_t: x[m],
            n_d: x[m + 1],
            n_p: x[m + 2],
            n_s: x[m + 3],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.n.clone();
        v.extend([self.n_t, self.n_d, self.n_p, self.n_s]);
        v
    }

    /// m₁·n: ligands, bound or free.
    pub fn ligands(&self) -> f64 {
        self.n.iter().sum::<f64>() + self.n_s
    }

    /// m₂·n: phosphate groups.
    pub fn phosphates(&self) -> f64 {
        let bound: f64 = self.n.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
        2.0 * self.n_t + self.n_d + self.n_p + bound
    }

    /// m₃·n: nucleotides, since ATP and ADP only interconvert.
    pub fn nucleotides(&self) -> f64 {
        self.n_t + self.n_d
    }

    pub fn totals(&self) -> Totals {
        Totals {
            ligands: self.ligands(),
            phosphates: self.phosphates(),
            nucleotides: self.nucleotides(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_vec().iter().all(|v| *v >= 0.0)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["species", "concentration"]);
        let names = species_names(self.n.len() - 1);
        for (name, v) in names.iter().zip(self.to_vec()) {
            t.push(vec![name.clone(), num(v)]);
        }
        t
    }
}

fn species_names(n: usize) -> Vec<String> {
    let mut s: Vec<String> = (0..=n).map(complex).collect();
    s.extend([ATP, ADP, PHOSPHATE, FREE].map(String::from));
    s
}

/// The enlarged network as an explicit reaction list.
pub fn build_enlarged(p: &EnlargedParams) -> Result<NetworkSpec> {
    p.validate()?;
    let r = p.rates();
    let one = |s: &str| (s.to_string(), 1u32);
    let mut rx = Vec::new();
    for k in 0..p.n {
        let (a, b) = (complex(k), complex(k + 1));
        rx.push(Reaction::new(vec![one(&a), one(ATP)], vec![one(&b), one(ADP)], r.r1f));
        rx.push(Reaction::new(vec![one(&b), one(ADP)], vec![one(&a), one(ATP)], r.r1b));
    }
    rx.push(Reaction::new(vec![one(ATP)], vec![one(ADP), one(PHOSPHATE)], r.r2f));
    rx.push(Reaction::new(vec![one(ADP), one(PHOSPHATE)], vec![one(ATP)], r.r2b));
    for k in 0..=p.n {
        let released = vec![one(FREE), (PHOSPHATE.to_string(), k as u32)];
        rx.push(Reaction::new(vec![one(&complex(k))], released.clone(), r.r3f));
        rx.push(Reaction::new(released, vec![one(&complex(k))], r.r3b(k)));
    }
    NetworkSpec::new(species_names(p.n), rx)
}

/// Mass-action right-hand side, in the species order of `EnlargedState::to_vec`.
pub fn rhs_enlarged(state: &EnlargedState, p: &EnlargedParams) -> Vec<f64> {
    let mut out = vec![0.0; p.dim()];
    rhs_into(&state.to_vec(), p, &mut out);
    out
}

fn rhs_into(y: &[f64], p: &EnlargedParams, out: &mut [f64]) {
    let n = p.n;
    let r = p.rates();
    let (it, id, ip, is) = (n + 1, n + 2, n + 3, n + 4);
    let (t, d, ph, s) = (y[it], y[id], y[ip], y[is]);
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..n {
        let f = r.r1f * y[k] * t - r.r1b * y[k + 1] * d;
        out[k] -= f;
        out[k + 1] += f;
        out[it] -= f;
        out[id] += f;
    }
    let f2 = r.r2f * t - r.r2b * d * ph;
    out[it] -= f2;
    out[id] += f2;
    out[ip] += f2;
    let mut pk = 1.0;
    for k in 0..=n {
        let f = r.r3f * y[k] - r.r3b(k) * s * pk;
        out[k] -= f;
        out[is] += f;
        out[ip] += k as f64 * f;
        pk *= ph;
    }
}

fn jacobian(y: &[f64], p: &EnlargedParams) -> DMatrix<f64> {
    let n = p.n;
    let r = p.rates();
    let (it, id, ip, is) = (n + 1, n + 2, n + 3, n + 4);
    let (t, d, ph, s) = (y[it], y[id], y[ip], y[is]);
    let mut j = DMatrix::zeros(p.dim(), p.dim());
    // adds ν ⊗ ∇f for one flux
    let mut add = |nu: &[(usize, f64)], grad: &[(usize, f64)]| {
        for &(a, c) in nu {
            for &(b, g) in grad {
                j[(a, b)] += c * g;
            }
        }
    };
    for k in 0..n {
        add(
            &[(k, -1.0), (k + 1, 1.0), (it, -1.0), (id, 1.0)],
            &[(k, r.r1f * t), (k + 1, -r.r1b * d), (it, r.r1f * y[k]), (id, -r.r1b * y[k + 1])],
        );
    }
    add(
        &[(it, -1.0), (id, 1.0), (ip, 1.0)],
        &[(it, r.r2f), (id, -r.r2b * ph), (ip, -r.r2b * d)],
    );
    for k in 0..=n {
        let b = r.r3b(k);
        let dp = if k == 0 { 0.0 } else { -b * s * k as f64 * ph.powi(k as i32 - 1) };
        add(
            &[(k, -1.0), (is, 1.0), (ip, k as f64)],
            &[(k, r.r3f), (is, -b * ph.powi(k as i32)), (ip, dp)],
        );
    }
    j
}

struct System<'a>(&'a EnlargedParams);

impl OdeSystem for System<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn rhs(&self, y: &[f64], out: &mut [f64]) {
        rhs_into(y, self.0, out);
    }
    fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        jacobian(y, self.0)
    }
}

fn integrator() -> Sdirk2 {
    Sdirk2 {
        rtol: 1e-10,
        atol: 1e-15,
        ..Sdirk2::default()
    }
}

/// States at every time of `times`, starting from `state0` at t = 0.
pub fn integrate_enlarged_grid(state0: &EnlargedState, p: &EnlargedParams, times: &[f64]) -> Result<Vec<EnlargedState>> {
    p.validate()?;
    if state0.n.len() != p.n + 1 {
        return Err(invalid("state0", "wrong number of complexes"));
    }
    if !state0.is_nonnegative() {
        return Err(invalid("state0", "concentrations must be nonnegative"));
    }
    let ys = integrator().integrate(&System(p), &state0.to_vec(), times)?;
    Ok(ys.iter().map(|y| EnlargedState::from_slice(y)).collect())
}

pub fn integrate_enlarged(state0: &EnlargedState, p: &EnlargedParams, t: f64) -> Result<EnlargedState> {
    Ok(integrate_enlarged_grid(state0, p, &[t])?.pop().unwrap())
}

/// Largest relative drift of the conserved totals along a trajectory.
pub fn conservation_drift(traj: &[EnlargedState], start: &EnlargedState) -> f64 {
    let t0 = start.totals();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    traj.iter()
        .map(|s| {
            let t = s.totals();
            rel(t.ligands, t0.ligands)
                .max(rel(t.phosphates, t0.phosphates))
                .max(rel(t.nucleotides, t0.nucleotides))
        })
        .fold(0.0, f64::max)
}

/// Equilibrium e^{−𝐄 + μ₁m₁ + μ₂m₂ + μ₃m₃} with prescribed conserved totals.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumFit {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub state: EnlargedState,
}

pub fn equilibrium_with_totals(p: &EnlargedParams, totals: Totals) -> Result<EquilibriumFit> {
    let Totals { ligands, phosphates, nucleotides } = totals;
    if !(ligands > 0.0 && phosphates > 0.0 && nucleotides > 0.0) {
        return Err(invalid("totals", "conserved totals must be positive"));
    }
    // For fixed μ₂ the ligand and nucleotide totals fix μ₁ and μ₃, and the
    // phosphate total is then increasing in μ₂, so bisection on μ₂ suffices.
    let state_at = |mu2: f64| -> (f64, f64, EnlargedState) {
        let base = p.energy_vector(0.0);
        let weights: Vec<f64> = (0..=p.n).map(|k| (-base[k] + k as f64 * mu2).exp()).collect();
        let mu1 = (ligands / (1.0 + weights.iter().sum::<f64>())).ln();
        let (t, d) = ((-p.e_t + 2.0 * mu2).exp(), (-p.e_d + mu2).exp());
        let mu3 = (nucleotides / (t + d)).ln();
        let mut x: Vec<f64> = weights.iter().map(|w| w * mu1.exp()).collect();
        x.extend([t * mu3.exp(), d * mu3.exp(), (-p.e_p + mu2).exp(), mu1.exp()]);
        (mu1, mu3, EnlargedState::from_slice(&x))
    };
    let excess = |mu2: f64| state_at(mu2).2.phosphates() - phosphates;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while excess(lo) > 0.0 {
        lo *= 2.0;
        if lo < -1e4 {
            return Err(Error::NoRoot("phosphate total below every equilibrium".into()));
        }
    }
    while excess(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::NoRoot("phosphate total above every equilibrium".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let mu2 = 0.5 * (lo + hi);
    let (mu1, mu3, state) = state_at(mu2);
    Ok(EquilibriumFit { mu1, mu2, mu3, state })
}

/// Δ = E_T − E_D − E_P + log(n̄_T / (n̄_P n̄_D)).
pub fn frozen_delta(nbar_t: f64, nbar_d: f64, nbar_p: f64, p: &EnlargedParams) -> Result<f64> {
    for (name, v) in [("nbar_t", nbar_t), ("nbar_d", nbar_d), ("nbar_p", nbar_p)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, "frozen concentrations must be positive"));
        }
    }
    Ok(p.e_t - p.e_d - p.e_p + (nbar_t / (nbar_p * nbar_d)).ln())
}

/// Freeze ATP, ADP and P at the given levels and return the induced ladder.
///
/// Phosphorylation runs at αe^{E_T}n̄_T and dephosphorylation at αe^{E+E_D}n̄_D;
/// attachment to C_k runs at e^{k(E_P−E)}n̄_P^k. With n̄_P = e^{−E_P} and
/// n̄_D = e^{−E_D} these are the ladder rates. Output and degradation are
/// appended from `deg` so the result can be compared with the ladder directly.
pub fn frozen_reduction(
    nbar_t: f64,
    nbar_d: f64,
    nbar_p: f64,
    p: &EnlargedParams,
    deg: crate::crn::Degradation,
) -> Result<(ModelParams, NetworkSpec)> {
    let delta = frozen_delta(nbar_t, nbar_d, nbar_p, p)?;
    let params = ModelParams::new(p.n, p.alpha, delta, p.sigma, p.energy, deg)?;
    let r = p.rates();
    let phos = r.r1f * nbar_t;
    let dephos = r.r1b * nbar_d;
    let n = p.n;
    let mut species = vec![FREE.to_string()];
    species.extend((0..=n).map(complex));
    species.push(OUTPUT.into());
    species.push(DEGRADED.into());
    let mut rx = Vec::new();
    for k in 0..=n {
        let rate = (k as f64 * (r.r3b_log + nbar_p.ln())).exp();
        rx.push(Reaction::simple(FREE, &complex(k), rate));
    }
    for k in 0..=n {
        rx.push(Reaction::simple(&complex(k), FREE, r.r3f));
    }
    for k in 0..n {
        rx.push(Reaction::simple(&complex(k), &complex(k + 1), phos));
    }
    for k in 1..=n {
        rx.push(Reaction::simple(&complex(k), &complex(k - 1), dephos));
    }
    rx.push(Reaction::simple(&complex(n), OUTPUT, phos));
    let mu = params.mu();
    rx.push(Reaction::simple(FREE, DEGRADED, mu));
    for k in 0..=n {
        rx.push(Reaction::simple(&complex(k), DEGRADED, mu));
    }
    Ok((params, NetworkSpec::new(species, rx)?))
}

/// Frozen concentrations n̄_T = e^{Δ−E_T}, n̄_D = e^{−E_D}, n̄_P = e^{−E_P}.
pub fn frozen_levels(p: &EnlargedParams, delta: f64) -> (f64, f64, f64) {
    ((delta - p.e_t).exp(), (-p.e_d).exp(), (-p.e_p).exp())
}

/// Frozen state: complexes at e^{−σ−kE}, n_S = 1, ATP/ADP/P at their frozen levels.
pub fn frozen_state(p: &EnlargedParams, delta: f64) -> EnlargedState {
    let mut s = p.equilibrium();
    let (t, d, ph) = frozen_levels(p, delta);
    s.n_t = t;
    s.n_d = d;
    s.n_p = ph;
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fluxes {
    pub j_t: f64,
    pub j_d: f64,
    pub j_p: f64,
}

/// External supplies that hold ATP, ADP and P fixed at the frozen state.
pub fn external_fluxes(p: &EnlargedParams, delta: f64) -> Result<Fluxes> {
    p.validate()?;
    if !(delta >= 0.0) {
        return Err(invalid("delta", "must be nonnegative"));
    }
    let geo = -(-(p.n as f64) * p.energy).exp_m1() / -(-p.energy).exp_m1();
    let factor = 1.0 + p.alpha * (-p.sigma).exp() * geo;
    let j_t = delta.exp_m1() * factor;
    Ok(Fluxes {
        j_t,
        j_d: -j_t,
        j_p: -delta.exp_m1(),
    })
}

/// Fluxes read off as minus the free rates of change of ATP, ADP and P at the frozen state.
pub fn direct_fluxes(p: &EnlargedParams, delta: f64) -> Fluxes {
    let rhs = rhs_enlarged(&frozen_state(p, delta), p);
    let m = p.n + 1;
    Fluxes {
        j_t: -rhs[m],
        j_d: -rhs[m + 1],
        j_p: -rhs[m + 2],
    }
}

/// Orthonormal basis of the left null space of the stoichiometric matrix.
pub fn conserved_directions(net: &NetworkSpec) -> Vec<Vec<f64>> {
    let s = net.stoichiometric_matrix();
    let (rows, cols) = (s.len(), net.reactions.len());
    let a = DMatrix::from_fn(cols, rows, |i, j| s[j][i] as f64);
    // null space of Sᵀ from the eigenvectors of S Sᵀ with zero eigenvalue
    let g = a.transpose() * &a;
    let eig = g.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    (0..rows)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-10 * scale)
        .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect()
}

/// The conserved directions m₁ (ligands), m₂ (phosphates), m₃ (nucleotides).
pub fn conserved_vectors(n: usize) -> [Vec<f64>; 3] {
    let m1 = (0..=n).map(|_| 1.0).chain([0.0, 0.0, 0.0, 1.0]).collect();
    let m2 = (0..=n).map(|k| k as f64).chain([2.0, 1.0, 1.0, 0.0]).collect();
    let m3 = (0..=n).map(|_| 0.0).chain([1.0, 1.0, 0.0, 0.0]).collect();
    [m1, m2, m3]
}

/// Distance of `v` from the span of `basis`, relative to |v|.
pub fn span_residual(v: &[f64], basis: &[Vec<f64>]) -> f64 {
    let a = DMatrix::from_fn(v.len(), basis.len(), |i, j| basis[j][i]);
    let b = nalgebra::DVector::from_column_slice(v);
    let x = (a.transpose() * &a).lu().solve(&(a.transpose() * &b)).unwrap();
    (b.clone() - a * x).norm() / b.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crn::{build_ladder, cycle_delta, wegscheider_holds, Degradation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ep(n: usize) -> EnlargedParams {
        EnlargedParams {
            n,
            alpha: 1.0,
            sigma: 0.3,
            energy: 3f64.ln(),
            e_t: 0.7,
            e_d: -0.2,
            e_p: 0.4,
        }
    }

    fn inf_norm(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn equilibrium_is_stationary() {
        for n in [1, 5, 12] {
            let p = ep(n);
            assert!(inf_norm(&rhs_enlarged(&p.equilibrium(), &p)) <= 1e-12);
        }
    }

    #[test]
    fn free_ligand_at_energy_one_is_not_stationary() {
        let p = ep(4);
        let x: Vec<f64> = p.energy_vector(1.0).iter().map(|e| (-e).exp()).collect();
        assert!(inf_norm(&rhs_enlarged(&EnlargedState::from_slice(&x), &p)) > 1e-2);
    }

    #[test]
    fn matches_generic_mass_action() {
        let p = ep(6);
        let net = build_enlarged(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let y: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(0.0..2.0)).collect();
            let a = rhs_enlarged(&EnlargedState::from_slice(&y), &p);
            let b = net.mass_action_rhs(&y);
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn conservation_on_random_states() {
        let p = ep(7);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let y: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(0.0..1.5)).collect();
            let r = rhs_enlarged(&EnlargedState::from_slice(&y), &p);
            let d = EnlargedState::from_slice(&r);
            assert!(d.ligands().abs() <= 1e-12);
            assert!(d.phosphates().abs() <= 1e-12);
            assert!(d.nucleotides().abs() <= 1e-12);
        }
    }

    #[test]
    fn hand_expanded_single_step() {
        let p = ep(1);
        let (n0, n1, t, d, ph, s) = (0.3, 0.7, 1.1, 0.4, 0.9, 0.25);
        let st = EnlargedState { n: vec![n0, n1], n_t: t, n_d: d, n_p: ph, n_s: s };
        let r = rhs_enlarged(&st, &p);
        let (a, e) = (p.alpha, p.energy);
        let f1 = a * p.e_t.exp() * n0 * t - a * (e + p.e_d).exp() * n1 * d;
        let f2 = p.e_t.exp() * t - (p.e_d + p.e_p).exp() * d * ph;
        let g0 = p.sigma.exp() * n0 - s;
        let g1 = p.sigma.exp() * n1 - (p.e_p - e).exp() * s * ph;
        let want = [-f1 - g0, f1 - g1, -f1 - f2, f1 + f2, f2 + g1, g0 + g1];
        for (u, v) in r.iter().zip(want) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = ep(4);
        let y: Vec<f64> = (0..p.dim()).map(|i| 0.3 + 0.1 * i as f64).collect();
        let j = jacobian(&y, &p);
        let h = 1e-6;
        for c in 0..p.dim() {
            let (mut a, mut b) = (y.clone(), y.clone());
            a[c] += h;
            b[c] -= h;
            let mut fa = vec![0.0; p.dim()];
            let mut fb = vec![0.0; p.dim()];
            rhs_into(&a, &p, &mut fa);
            rhs_into(&b, &p, &mut fb);
            for r in 0..p.dim() {
                let fd = (fa[r] - fb[r]) / (2.0 * h);
                assert!((fd - j[(r, c)]).abs() < 1e-7, "({r},{c})");
            }
        }
    }

    #[test]
    fn wegscheider_for_enlarged() {
        for (et, ed, epp) in [(0.0, 0.0, 0.0), (1.5, -0.7, 2.2), (-3.0, 0.4, -1.0)] {
            let p = EnlargedParams { e_t: et, e_d: ed, e_p: epp, ..ep(5) };
            let (ok, reps) = wegscheider_holds(&build_enlarged(&p).unwrap(), 1e-10).unwrap();
            assert!(ok, "{reps:?}");
        }
    }

    #[test]
    fn stays_at_equilibrium() {
        let p = ep(5);
        let s0 = p.equilibrium();
        let s = integrate_enlarged(&s0, &p, 100.0).unwrap();
        for (a, b) in s.to_vec().iter().zip(s0.to_vec()) {
            assert!((a - b).abs() <= 1e-9 * b.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn relaxes_to_fitted_equilibrium() {
        let p = ep(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s0 = EnlargedState::from_slice(&y);
        let times = [1.0, 10.0, 100.0, 400.0];
        let traj = integrate_enlarged_grid(&s0, &p, &times).unwrap();
        assert!(conservation_drift(&traj, &s0) <= 1e-9);
        assert!(traj.iter().all(|s| s.is_nonnegative()));
        let fit = equilibrium_with_totals(&p, s0.totals()).unwrap();
        let last = traj.last().unwrap();
        let res = last
            .to_vec()
            .iter()
            .zip(fit.state.to_vec())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / b));
        assert!(res < 1e-6, "{res}");
        assert!(inf_norm(&rhs_enlarged(&fit.state, &p)) < 1e-12);
    }

    #[test]
    fn frozen_reduction_matches_ladder() {
        let p = ep(6);
        let deg = Degradation::Exponent(2f64.ln());
        let (t, d, ph) = frozen_levels(&p, 2.0);
        let (params, net) = frozen_reduction(t, d, ph, &p, deg).unwrap();
        assert!((params.delta - 2.0).abs() < 1e-12);
        let ladder = build_ladder(&params).unwrap();
        assert_eq!(net.species, ladder.species);
        assert_eq!(net.reactions.len(), ladder.reactions.len());
        for (a, b) in net.reactions.iter().zip(&ladder.reactions) {
            assert_eq!(a.reactants, b.reactants);
            assert_eq!(a.products, b.products);
            assert!((a.rate - b.rate).abs() <= 1e-12 * b.rate);
        }
        for k in 0..6 {
            assert!((cycle_delta(&net, k).unwrap() - 2.0).abs() < 1e-12);
        }
        let (t0, ..) = frozen_levels(&p, 0.0);
        assert!(frozen_delta(t0, d, ph, &p).unwrap().abs() < 1e-12);
        let dd = frozen_delta(2.0 * t, d, ph, &p).unwrap() - 2.0;
        assert!((dd - 2f64.ln()).abs() < 1e-12);
        assert!(frozen_delta(0.0, d, ph, &p).is_err());
    }

    #[test]
    fn fluxes_closed_form_vs_direct() {
        let p = ep(8);
        for delta in [0.0, 0.5, 1.0, 2.0] {
            let a = external_fluxes(&p, delta).unwrap();
            let b = direct_fluxes(&p, delta);
            assert!((a.j_t - b.j_t).abs() <= 1e-10 * (1.0 + a.j_t.abs()));
            assert!((a.j_d - b.j_d).abs() <= 1e-10 * (1.0 + a.j_d.abs()));
            assert!((a.j_p - b.j_p).abs() <= 1e-10 * (1.0 + a.j_p.abs()));
            if delta == 0.0 {
                assert_eq!((a.j_t, a.j_p), (0.0, 0.0));
            } else {
                assert!(a.j_t > 0.0 && a.j_d < 0.0 && a.j_p < 0.0);
            }
        }
    }

    #[test]
    fn conserved_directions_span() {
        let p = ep(5);
        let dirs = conserved_directions(&build_enlarged(&p).unwrap());
        let [m1, m2, m3] = conserved_vectors(p.n);
        // nucleotides are conserved too, so the left null space is three-dimensional
        assert_eq!(dirs.len(), 3);
        let all = [m1.clone(), m2.clone(), m3.clone()];
        for v in &dirs {
            assert!(span_residual(v, &all) < 1e-10);
        }
        assert!(span_residual(&m3, &[m1.clone(), m2.clone()]) > 0.1);
        for m in [m1, m2] {
            assert!(span_residual(&m, &dirs) < 1e-10);
        }
    }
}
