//! The acceptance suite, shared by the `verify` subcommand and the
//! `acceptance` test target. Each check returns a [`CheckResult`] instead of
//! panicking, so a run always reports every line.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{
    classify, delta_c, lambda, phi_roots, sigma_c, LaplaceKernel, Regime,
};
use crate::crn::{build_ladder, wegscheider_holds, ModelParams, WEGSCHEIDER_TOL};
use crate::enlarged::{
    conservation_drift, direct_fluxes, external_fluxes, frozen_state, integrate_enlarged_grid, rhs_enlarged,
    EnlargedParams,
};
use crate::error::Result;
use crate::finite::{linspace, log_odds_exact, pres_exact, solve, sweep_sigma, total_probability};
use crate::half_line::{integrate_halfline, talbot_invert, verify_theorem_5, ConvergenceTable, TAU_LADDER};
use crate::mc::estimate_pres;
use crate::pde::{initial_datum, refinement_ratios, refinement_study, relax, PdeKind, PdeParams};
use crate::variants::{
    delta_c_attachment, delta_c_dephosphorylation, delta_infty_phi, fit_profile, g_attachment,
    variant_exponent, variant_steady_profile, VariantKind, VariantSpec,
};

/// Outcome of one acceptance check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    /// `PASS [id] name (t s): detail`
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {} ({:.2} s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn timed(id: &'static str, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { id, name, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

fn within_budget(mut r: CheckResult, budget: f64) -> CheckResult {
    if r.seconds >= budget {
        r.pass = false;
        r.detail.push_str(&format!("; over the {budget} s budget"));
    }
    r
}

/// Every check, in order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        response_curve(),
        critical_delta_curve(),
        log_odds_convergence(),
        rational_oracle(),
        monte_carlo_oracle(),
        total_probability_sample(),
        half_line_rays(),
        half_line_critical_ray(),
        laplace_cross_check(),
        enlarged_network(),
        pde_exponents(),
        variant_exponents(),
        structural_invariants(),
        theta_modulus_bound(),
    ]
}

fn fig2(delta: f64) -> Result<ModelParams> {
    ModelParams::with_b(20, 1.0, delta, 0.0, 3f64.ln(), 2f64.ln())
}

/// Response probability across σ at N = 20, without and with proofreading drive.
pub fn response_curve() -> CheckResult {
    let r = timed("1", "response curve at N = 20", || {
        let grid = linspace(-2.0, 4.0, 241);
        let low = sweep_sigma(&fig2(0.1)?, &grid)?;
        let high = sweep_sigma(&fig2(2.0)?, &grid)?;
        let max_low = low.pres.iter().fold(0.0f64, |m, v| m.max(*v));
        let cross = high.half_crossing();
        let top = high.pres.iter().fold(0.0f64, |m, v| m.max(*v));
        let bottom = high.pres.iter().fold(1.0f64, |m, v| m.min(*v));
        let ok = max_low < 0.05
            && cross.is_some_and(|c| (c - 1.773).abs() <= 0.15)
            && top > 0.9
            && bottom < 0.1
            && low.errors.iter().chain(&high.errors).all(Option::is_none);
        Ok((
            ok,
            format!(
                "Δ=0.1 max p_res {max_low:.3e}; Δ=2 crossing {}, range [{bottom:.3e}, {top:.6}]",
                cross.map_or("none".into(), |c| format!("{c:.4}"))
            ),
        ))
    });
    within_budget(r, 1.0)
}

/// Δ_c(σ) for α = 1, E = ln 2.
pub fn critical_delta_curve() -> CheckResult {
    timed("2", "critical Δ curve", || {
        let e = 2f64.ln();
        let grid = linspace(-5.0, 5.0, 201);
        let dc: Vec<f64> = grid.iter().map(|&s| delta_c(1.0, e, s)).collect();
        let increasing = dc.windows(2).all(|w| w[1] > w[0]);
        let at0 = (delta_c(1.0, e, 0.0) - 2f64.ln()).abs();
        Ok((increasing && at0 <= 1e-12, format!("strictly increasing: {increasing}; |Δ_c(0) − ln 2| = {at0:.1e}")))
    })
}

/// Normalized log-odds against λ − b at N = 20 and 40.
pub fn log_odds_convergence() -> CheckResult {
    let r = timed("3", "log-odds convergence", || {
        let base = fig2(2.0)?;
        let sc = sigma_c(base.b(), &base)?;
        let cases = [
            ("σ_c−1", base.with_sigma(sc - 1.0)),
            ("σ_c+1", base.with_sigma(sc + 1.0)),
            ("σ=0 (Δ=0.1)", fig2(0.1)?),
        ];
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, p) in cases {
            let target = lambda(&p) - p.b();
            let g20 = (log_odds_exact(&p.with_n(20))? - target).abs();
            let g40 = (log_odds_exact(&p.with_n(40))? - target).abs();
            let ratio = g40 / g20;
            let regime = classify(&p);
            ok &= (0.3..=0.8).contains(&ratio) && g40 <= 0.1;
            parts.push(format!("{label} {regime:?}: gap40 {g40:.4}, ratio {ratio:.3}"));
        }
        Ok((ok, parts.join("; ")))
    });
    within_budget(r, 1.0)
}

fn rat(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite rate")
}

/// Exact response probability by Gaussian elimination over the rationals,
/// from the backward equations h_i·(exit rate) = Σ r_ij h_j + (rate to output).
/// Each floating-point rate is converted exactly.
pub fn rational_pres(p: &ModelParams) -> f64 {
    let n = p.n;
    let m = n + 2; // S, C_0..C_N
    let mut a = vec![vec![BigRational::zero(); m + 1]; m];
    let mu = rat(p.mu());
    let (phos, detach, dephos) = (rat(p.k_phos()), rat(p.k_detach()), rat(p.k_dephos()));
    let mut out_s = mu.clone();
    for k in 0..=n {
        let r = rat(p.k_attach(k));
        out_s += &r;
        a[0][k + 1] -= r;
    }
    a[0][0] = out_s;
    for k in 0..=n {
        let i = k + 1;
        let mut exit = &mu + &phos + &detach;
        a[i][0] -= &detach;
        if k > 0 {
            exit += &dephos;
            a[i][i - 1] -= &dephos;
        }
        if k < n {
            a[i][i + 1] -= &phos;
        } else {
            a[i][m] = phos.clone();
        }
        a[i][i] += exit;
    }
    for c in 0..m {
        let piv = (c..m).find(|&r| !a[r][c].is_zero()).expect("nonsingular");
        a.swap(c, piv);
        let inv = BigRational::one() / &a[c][c];
        for r in 0..m {
            if r != c && !a[r][c].is_zero() {
                let f = &a[r][c] * &inv;
                for j in c..=m {
                    let d = &f * &a[c][j];
                    a[r][j] -= d;
                }
            }
        }
    }
    let h = &a[0][m] / &a[0][0];
    // scale into f64 range before the final conversion
    let (num, den) = (h.numer().clone(), h.denom().clone());
    let shift = num.bits() as i64 - den.bits() as i64;
    let scaled = if shift > 0 {
        BigRational::new(num, den << shift as usize)
    } else {
        BigRational::new(num << (-shift) as usize, den)
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Exact solve against the rational oracle at N = 1.
pub fn rational_oracle() -> CheckResult {
    timed("4a", "rational oracle at N = 1", || {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let p = ModelParams::with_b(
                1,
                rng.gen_range(0.2..5.0),
                rng.gen_range(0.0..4.0),
                rng.gen_range(-3.0..4.0),
                rng.gen_range(0.1..2.5),
                rng.gen_range(0.0..2.0),
            )?;
            let exact = rational_pres(&p);
            let got = pres_exact(&p)?;
            worst = worst.max((got - exact).abs() / exact);
        }
        Ok((worst <= 1e-14, format!("max relative difference over 50 draws {worst:.2e}")))
    })
}

/// 10⁶ simulated ligands at N = 8.
pub fn monte_carlo_oracle() -> CheckResult {
    let r = timed("4b", "Monte Carlo at N = 8", || {
        let p = ModelParams::with_b(8, 1.0, 2.0, 0.0, 3f64.ln(), 0.3)?;
        let exact = pres_exact(&p)?;
        let est = estimate_pres(&p, 1_000_000, 20_240_601)?;
        let z = (est.p_hat - exact) / est.stderr;
        Ok((
            z.abs() <= 3.0,
            format!("exact {exact:.6}, estimate {:.6} ± {:.1e}, z = {z:.2}", est.p_hat, est.stderr),
        ))
    });
    within_budget(r, 60.0)
}

/// αe^Δ x_N + μΣx = 1 over random parameters.
pub fn total_probability_sample() -> CheckResult {
    timed("5", "total probability identity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let p = ModelParams::with_b(
                rng.gen_range(1..=60),
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.0..5.0),
                rng.gen_range(-4.0..6.0),
                rng.gen_range(0.05..3.0),
                rng.gen_range(0.0..1.5),
            )?;
            let s = solve(&p)?;
            worst = worst.max((total_probability(&p, &s.x) - 1.0).abs());
        }
        Ok((worst <= 1e-10, format!("max deviation over 100 draws {worst:.2e}")))
    })
}

fn halfline_params(delta: f64) -> Result<ModelParams> {
    ModelParams::with_b(10, 1.0, delta, 0.0, 3f64.ln(), 0.5)
}

fn ray_summary(label: &str, t: &ConvergenceTable) -> String {
    let gaps: Vec<String> = t.rows.iter().map(|r| format!("{:.2e}", r.gap)).collect();
    format!("{label}: limit {:.6}, gaps [{}]", t.target.limit, gaps.join(", "))
}

fn ray_ok(t: &ConvergenceTable) -> bool {
    t.gaps_decreasing() && t.final_gap() <= 0.1
}

/// Ratios along rays in the subcritical and supercritical regimes.
pub fn half_line_rays() -> CheckResult {
    let r = timed("6a", "half-line rays, off-critical", || {
        let cases = [("subcritical θ=0.3", 0.1, 0.3), ("supercritical θ=0.5", 4.0, 0.5), ("supercritical θ=2", 4.0, 2.0)];
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, delta, theta) in cases {
            let t = verify_theorem_5(theta, &TAU_LADDER, &halfline_params(delta)?)?;
            ok &= ray_ok(&t);
            parts.push(ray_summary(label, &t));
        }
        Ok((ok, parts.join("; ")))
    });
    within_budget(r, 120.0)
}

/// Critical regime against the closed-form limit n̄_S(1 − 1/(2αe^E)).
pub fn half_line_critical_ray() -> CheckResult {
    let r = timed("6b", "half-line ray, critical", || {
        let e = 3f64.ln();
        let p = halfline_params(delta_c(1.0, e, 0.0))?;
        debug_assert_eq!(classify(&p), Regime::Critical);
        let t = verify_theorem_5(0.3, &TAU_LADDER, &p)?;
        // the stationary boundary value the lattice actually approaches
        let nbar = crate::analytic::nbar_s(&p);
        let (ed, ee) = (p.delta.exp(), (p.delta + p.energy).exp());
        let n0 = ed * nbar / (p.alpha * (ee - 1.0) * (ed - 1.0));
        let run = integrate_halfline(&p, 2000.0, 400)?;
        Ok((
            ray_ok(&t),
            format!(
                "{}; ratios [{}]; lattice n_0(2000) = {:.6} vs e^Δn̄_S/(α(e^(Δ+E)−1)(e^Δ−1)) = {n0:.6}",
                ray_summary("θ=0.3", &t),
                t.rows.iter().map(|r| format!("{:.3}", r.ratio)).collect::<Vec<_>>().join(", "),
                run.n[0]
            ),
        ))
    });
    within_budget(r, 120.0)
}

/// Talbot inversion against lattice integration for k ≤ 10, t ≤ 10.
pub fn laplace_cross_check() -> CheckResult {
    timed("7", "Laplace inversion vs lattice", || {
        let e = 3f64.ln();
        let regimes = [("sub", 0.1), ("crit", delta_c(1.0, e, 0.0)), ("super", 2.0)];
        let times = [0.5, 1.0, 2.0, 5.0, 10.0];
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for (label, delta) in regimes {
            let p = halfline_params(delta)?;
            let mut w = 0.0f64;
            for &t in &times {
                let run = integrate_halfline(&p, t, crate::half_line::auto_truncation(&p, t, 1.0))?;
                for k in 0..=10 {
                    let lt = talbot_invert(k, t, &p)?;
                    w = w.max((lt - run.n[k]).abs() / run.n[k]);
                }
            }
            worst = worst.max(w);
            parts.push(format!("{label} {w:.1e}"));
        }
        Ok((worst <= 1e-6, format!("max relative difference: {}", parts.join(", "))))
    })
}

/// Enlarged network: stationarity, conservation and flux signs.
pub fn enlarged_network() -> CheckResult {
    timed("8", "enlarged network", || {
        let p = EnlargedParams { n: 8, alpha: 1.0, sigma: 0.3, energy: 3f64.ln(), e_t: 0.7, e_d: -0.2, e_p: 0.4 };
        let stat = rhs_enlarged(&p.equilibrium(), &p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut ok = stat <= 1e-12;
        let mut parts = vec![format!("|d/dt e^(−E)| {stat:.1e}")];
        for delta in [0.5, 1.0, 2.0] {
            let s0 = frozen_state(&p, delta);
            let traj = integrate_enlarged_grid(&s0, &p, &[25.0, 50.0, 100.0])?;
            let drift = conservation_drift(&traj, &s0);
            let f = external_fluxes(&p, delta)?;
            let d = direct_fluxes(&p, delta);
            let jp = -delta.exp_m1();
            let sum = (f.j_t + f.j_d).abs();
            let direct = (f.j_t - d.j_t).abs().max((f.j_d - d.j_d).abs()).max((f.j_p - d.j_p).abs());
            let good = drift <= 1e-9
                && f.j_t > 0.0
                && f.j_d < 0.0
                && (f.j_p - jp).abs() <= 1e-12 * jp.abs()
                && sum <= 1e-12
                && direct <= 1e-12 * f.j_t.abs().max(1.0);
            ok &= good;
            parts.push(format!(
                "Δ={delta}: drift {drift:.1e}, J_T {:.4}, J_D {:.4}, J_P {:.4}, |J_T+J_D| {sum:.1e}, direct {direct:.1e}",
                f.j_t, f.j_d, f.j_p
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

fn pde1_params() -> PdeParams {
    PdeParams { beta: 2.0, loss: 0.01, alpha: 1.0, energy: 0.5, delta: 1.5, length: 20.0, cells: 2000 }
}

fn pde2_params() -> PdeParams {
    PdeParams { beta: 1.5, loss: 0.0, alpha: 1.0, energy: 0.0, delta: 1.5, length: 20.0, cells: 2000 }
}

/// Long-time exponents of both transport equations and first-order refinement.
pub fn pde_exponents() -> CheckResult {
    timed("9", "transport exponents", || {
        let ladder = [500, 1000, 2000, 4000];
        let halves = |r: &[f64]| r.iter().all(|x| (0.35..=0.65).contains(x));

        let p1 = pde1_params();
        let f1 = relax(&p1, PdeKind::Pde1, &initial_datum(&p1, PdeKind::Pde1)?)?;
        let slope = -f1.log_slope()?.slope;
        let rel1 = (slope / p1.lambda1_printed() - 1.0).abs();
        let r1 = refinement_ratios(&refinement_study(&p1, PdeKind::Pde1, &ladder, p1.lambda1_exact())?);

        let p2 = pde2_params();
        let f2 = relax(&p2, PdeKind::Pde2, &initial_datum(&p2, PdeKind::Pde2)?)?;
        let lam = f2.two_exp()?.lambda;
        let rel2 = (lam / p2.lambda2() - 1.0).abs();
        let r2 = refinement_ratios(&refinement_study(&p2, PdeKind::Pde2, &ladder, p2.lambda2())?);

        let ok = rel1 <= 0.02 && rel2 <= 0.03 && p2.pde2_discriminates() && halves(&r1) && halves(&r2);
        let fmt = |r: &[f64]| r.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
        Ok((
            ok,
            format!(
                "PDE1 slope {slope:.5} vs (β+δ)/v {:.5} ({:.2}%), ratios [{}]; PDE2 λ {lam:.5} vs β/(α(e^Δ−1)) {:.5} ({:.2}%), ratios [{}]",
                p1.lambda1_printed(),
                100.0 * rel1,
                fmt(&r1),
                p2.lambda2(),
                100.0 * rel2,
                fmt(&r2)
            ),
        ))
    })
}

fn variant_params(delta: f64, sigma: f64) -> Result<ModelParams> {
    ModelParams::with_b(10, 1.0, delta, sigma, 3f64.ln(), 0.5)
}

/// Exponents of the four modified networks.
pub fn variant_exponents() -> CheckResult {
    timed("10", "modified networks", || {
        let mut ok = true;
        let mut parts = Vec::new();

        let mut worst = 0.0f64;
        for sigma in [-1.0, 0.0, 1.0] {
            let dc = delta_c_attachment(&variant_params(0.0, sigma)?);
            let s = VariantSpec::new(VariantKind::Attachment, variant_params(dc + 0.5, sigma)?, 200)?;
            let lam = variant_exponent(&s)?.lambda;
            worst = worst.max((lam / -g_attachment(&s.params).ln() - 1.0).abs());
        }
        ok &= worst <= 0.02;
        parts.push(format!("attachment max rel {:.2}%", 100.0 * worst));

        let sigma = -1.0;
        let dc = delta_c_dephosphorylation(&variant_params(0.0, sigma)?)
            .ok_or_else(|| crate::Error::Degenerate("no critical Δ".into()))?;
        let below = variant_exponent(&VariantSpec::new(VariantKind::Dephosphorylation, variant_params(dc - 0.2, sigma)?, 200)?)?;
        let above = variant_exponent(&VariantSpec::new(VariantKind::Dephosphorylation, variant_params(dc + 0.2, sigma)?, 200)?)?;
        ok &= !below.sigma_sensitive && above.sigma_sensitive;
        parts.push(format!(
            "dephosphorylation Δ_c {dc:.4}: spread {:.1e} below, {:.1e} above",
            below.spread, above.spread
        ));

        let mut flat = 0.0f64;
        for delta in [0.5, 1.0, 2.0] {
            let s = VariantSpec::new(VariantKind::Detachment, variant_params(delta, 0.3)?, 60)?;
            let fit = fit_profile(&variant_steady_profile(&s)?, s.params.energy + delta)?;
            flat = flat.max(fit.slope.abs());
        }
        ok &= flat <= 0.01;
        parts.push(format!("detachment max rescaled slope {flat:.1e}"));

        let mut gap = 0.0f64;
        for (sigma, gamma) in [(0.0, 1.0), (1.0, 0.5), (-2.0, 3.0)] {
            let delta: f64 = 25.0;
            let p = ModelParams::with_b(10, gamma * (-delta).exp(), delta, sigma, 3f64.ln(), 0.5)?;
            gap = gap.max((phi_roots(&p).0 - delta_infty_phi(sigma, gamma, p.energy)?).abs());
        }
        ok &= gap <= 1e-6;
        parts.push(format!("Δ=25 φ-limit gap {gap:.1e}"));
        Ok((ok, parts.join("; ")))
    })
}

fn theta_points(kern: &LaplaceKernel, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(1000);
    while out.len() < 1000 {
        let z = Complex64::new(rng.gen_range(-30.0..10.0), rng.gen_range(-15.0..15.0));
        if !kern.on_branch(z) {
            out.push(z);
        }
    }
    out
}

/// Wegscheider, θ₁θ₂, φφ₂ and monotonicity of φ.
pub fn structural_invariants() -> CheckResult {
    timed("11a", "structural invariants", || {
        let e = 3f64.ln();
        let mut ok = true;
        let mut parts = Vec::new();

        let mut weg = Vec::new();
        for delta in [0.0, 1e-6, 0.5, 2.0] {
            let p = ModelParams::with_b(6, 1.0, delta, 0.2, e, 0.5)?;
            let (holds, _) = wegscheider_holds(&build_ladder(&p)?, WEGSCHEIDER_TOL)?;
            ok &= holds == (delta == 0.0);
            weg.push(format!("{delta}→{holds}"));
        }
        parts.push(format!("Wegscheider {}", weg.join(" ")));

        let mut prod = 0.0f64;
        for (i, delta) in [0.5, 2.0].into_iter().enumerate() {
            let p = ModelParams::with_b(6, 1.0, delta, 0.0, e, 0.5)?;
            let kern = LaplaceKernel::new(&p);
            let want = (delta - e).exp();
            for z in theta_points(&kern, 100 + i as u64) {
                let (t1, t2) = kern.thetas(z)?;
                prod = prod.max(((t1 * t2).re - want).abs().max((t1 * t2).im.abs()) / want);
            }
        }
        ok &= prod <= 1e-12;
        parts.push(format!("θ₁θ₂ max rel {prod:.1e}"));

        let mut pp = 0.0f64;
        let mut mono = true;
        for delta in [0.1, 1.0, 2.0, 4.0] {
            let base = ModelParams::with_b(6, 1.0, delta, 0.0, e, 0.5)?;
            let phis: Vec<f64> = linspace(-4.0, 6.0, 100)
                .into_iter()
                .map(|s| {
                    let (a, b) = phi_roots(&base.with_sigma(s));
                    pp = pp.max((a * b / (delta + e).exp() - 1.0).abs());
                    a
                })
                .collect();
            mono &= phis.windows(2).all(|w| w[1] < w[0]);
        }
        ok &= pp <= 1e-12 && mono;
        parts.push(format!("φφ₂ max rel {pp:.1e}; φ strictly decreasing {mono}"));
        Ok((ok, parts.join("; ")))
    })
}

/// |θ₁| ≤ 1 ≤ |θ₂| on the same seeded points, for Δ below and above E.
pub fn theta_modulus_bound() -> CheckResult {
    timed("11b", "θ modulus bound", || {
        let e = 3f64.ln();
        let mut ok = true;
        let mut parts = Vec::new();
        for (i, delta) in [0.5, 2.0].into_iter().enumerate() {
            let p = ModelParams::with_b(6, 1.0, delta, 0.0, e, 0.5)?;
            let kern = LaplaceKernel::new(&p);
            let sharp = (0.5 * (delta - e)).exp();
            let mut bad = 0;
            let mut sharp_bad = 0;
            let mut max1 = 0.0f64;
            for z in theta_points(&kern, 100 + i as u64) {
                let (t1, t2) = kern.thetas(z)?;
                max1 = max1.max(t1.norm());
                if t1.norm() > 1.0 || t2.norm() < 1.0 {
                    bad += 1;
                }
                if t1.norm() > sharp * (1.0 + 1e-12) || t2.norm() < sharp * (1.0 - 1e-12) {
                    sharp_bad += 1;
                }
            }
            ok &= bad == 0;
            parts.push(format!(
                "Δ={delta}: {bad}/1000 violate, max |θ₁| {max1:.4}; |θ₁| ≤ e^((Δ−E)/2) = {sharp:.4} ≤ |θ₂| violated at {sharp_bad}/1000"
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}
