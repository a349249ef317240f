//! Independent reference computations for the finite ladder.

use approx::assert_relative_eq;
use kinproof::acceptance::rational_pres;
use kinproof::finite::{integrate_from, pres_exact, solve, Method, StateVector};
use kinproof::mc::estimate_pres;
use kinproof::{Degradation, ModelParams};
use nalgebra::{DMatrix, DVector};

/// Hitting probability of the output from S via the backward equations, in f64.
fn backward_pres(p: &ModelParams) -> f64 {
    let n = p.n;
    let m = n + 2;
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    let mu = p.mu();
    a[(0, 0)] = mu;
    for k in 0..=n {
        a[(0, 0)] += p.k_attach(k);
        a[(0, k + 1)] -= p.k_attach(k);
    }
    for k in 0..=n {
        let i = k + 1;
        a[(i, i)] = mu + p.k_phos() + p.k_detach();
        a[(i, 0)] -= p.k_detach();
        if k > 0 {
            a[(i, i)] += p.k_dephos();
            a[(i, i - 1)] -= p.k_dephos();
        }
        if k < n {
            a[(i, i + 1)] -= p.k_phos();
        } else {
            rhs[i] = p.k_phos();
        }
    }
    a.lu().solve(&rhs).unwrap()[0]
}

#[test]
fn single_step_matches_rational_elimination() {
    for &(delta, sigma, b) in &[(0.0, 0.0, 0.1), (2.0, 1.0, 0.5), (4.0, -3.0, 1.5), (0.7, 3.5, 0.0)] {
        let p = ModelParams::with_b(1, 1.3, delta, sigma, 0.9, b).unwrap();
        assert_relative_eq!(pres_exact(&p).unwrap(), rational_pres(&p), max_relative = 1e-14);
    }
}

#[test]
fn forward_and_backward_equations_agree() {
    for n in [2, 5, 12, 30] {
        for &(delta, sigma) in &[(0.1, 0.0), (2.0, 1.5), (3.0, -2.0)] {
            let p = ModelParams::with_b(n, 1.0, delta, sigma, 3f64.ln(), 0.2).unwrap();
            assert_relative_eq!(pres_exact(&p).unwrap(), backward_pres(&p), max_relative = 1e-10);
        }
    }
}

#[test]
fn occupation_integral_matches_trajectory() {
    // x_N is the expected time spent in C_N, so αe^Δ ∫ n_N dt = p_res
    let p = ModelParams::new(4, 1.0, 1.0, 0.0, 3f64.ln(), Degradation::Rate(0.5)).unwrap();
    let h = 0.02;
    let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * h).collect();
    let traj = integrate_from(&p, &StateVector::initial(p.n), &grid, Method::Uniformized).unwrap();
    assert!(traj.last().unwrap().mass() < 1e-12);
    let f: Vec<f64> = traj.iter().map(|s| s.n[p.n]).collect();
    let simpson = h / 3.0
        * (f[0] + f[f.len() - 1] + (1..f.len() - 1).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f[i]).sum::<f64>());
    let sol = solve(&p).unwrap();
    assert_relative_eq!(simpson, sol.x[p.n + 1], max_relative = 1e-7);
    assert_relative_eq!(p.k_phos() * simpson, sol.pres, max_relative = 1e-7);
}

#[test]
fn monte_carlo_brackets_exact() {
    let p = ModelParams::with_b(8, 1.0, 2.0, 0.0, 3f64.ln(), 0.3).unwrap();
    let exact = pres_exact(&p).unwrap();
    let e = estimate_pres(&p, 200_000, 99).unwrap();
    assert!((e.p_hat - exact).abs() <= 3.0 * e.stderr, "{} vs {exact}", e.p_hat);
}
