use nalgebra::{DMatrix, DVector};

use super::generator::{build_generator, Generator};
use crate::crn::ModelParams;
use crate::error::{Error, Result};
use crate::linalg::uniformized_expmv;
use crate::stiff::{OdeSystem, Sdirk2};

/// Largest N integrated with a dense matrix exponential under `Method::Auto`.
pub const DENSE_EXPM_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub ns: f64,
    pub n: Vec<f64>,
}

impl StateVector {
    pub fn initial(n: usize) -> Self {
        StateVector { ns: 1.0, n: vec![0.0; n + 1] }
    }

    pub fn from_slice(x: &[f64]) -> Self {
        StateVector { ns: x[0], n: x[1..].to_vec() }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.ns).chain(self.n.iter().copied()).collect()
    }

    /// M = n_S + Σ n_k.
    pub fn mass(&self) -> f64 {
        self.ns + self.n.iter().sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dense exponential for N ≤ 12, implicit integrator above.
    Auto,
    DenseExpm,
    Implicit,
    /// Uniformization with the O(N) generator product.
    Uniformized,
}

struct LinearSystem<'a> {
    g: &'a Generator,
    dense: DMatrix<f64>,
}

impl OdeSystem for LinearSystem<'_> {
    fn dim(&self) -> usize {
        self.g.dim()
    }
    fn rhs(&self, y: &[f64], out: &mut [f64]) {
        self.g.apply(y, out);
    }
    fn jacobian(&self, _: &[f64]) -> DMatrix<f64> {
        self.dense.clone()
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    let ok = t_grid.iter().all(|t| t.is_finite() && *t >= 0.0) && t_grid.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t_grid",
            reason: "times must be finite, nonnegative and strictly increasing".into(),
        })
    }
}

/// States at each time of `t_grid`, starting from all mass on S.
pub fn integrate_trajectory(p: &ModelParams, t_grid: &[f64]) -> Result<Vec<StateVector>> {
    integrate_from(p, &StateVector::initial(p.n), t_grid, Method::Auto)
}

pub fn integrate_from(p: &ModelParams, start: &StateVector, t_grid: &[f64], method: Method) -> Result<Vec<StateVector>> {
    check_grid(t_grid)?;
    let g = build_generator(p)?;
    if start.n.len() != p.n + 1 {
        return Err(Error::Degenerate("initial state length does not match N".into()));
    }
    let y0 = start.to_vec();
    let method = match method {
        Method::Auto if p.n <= DENSE_EXPM_MAX_N => Method::DenseExpm,
        Method::Auto => Method::Implicit,
        m => m,
    };
    let states: Vec<Vec<f64>> = match method {
        Method::DenseExpm => {
            let a = g.to_dense();
            let mut out = Vec::with_capacity(t_grid.len());
            let mut y = DVector::from_vec(y0);
            let mut t = 0.0;
            let mut cache: Option<(f64, DMatrix<f64>)> = None;
            for &target in t_grid {
                let dt = target - t;
                if dt > 0.0 {
                    let reuse = matches!(&cache, Some((h, _)) if (h - dt).abs() <= 1e-14 * dt);
                    if !reuse {
                        cache = Some((dt, (&a * dt).exp()));
                    }
                    y = &cache.as_ref().unwrap().1 * y;
                }
                t = target;
                out.push(y.as_slice().to_vec());
            }
            out
        }
        Method::Implicit => {
            let sys = LinearSystem { g: &g, dense: g.to_dense() };
            let solver = Sdirk2 { rtol: 1e-11, atol: 1e-16, ..Sdirk2::default() };
            solver.integrate(&sys, &y0, t_grid)?
        }
        Method::Uniformized => {
            let rate = g.max_exit_rate();
            let mut out = Vec::with_capacity(t_grid.len());
            let mut y = y0;
            let mut t = 0.0;
            for &target in t_grid {
                y = uniformized_expmv(|x, o| g.apply(x, o), rate, target - t, &y);
                t = target;
                out.push(y.clone());
            }
            out
        }
        Method::Auto => unreachable!(),
    };
    Ok(states.iter().map(|v| StateVector::from_slice(v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> ModelParams {
        ModelParams::with_b(4, 1.0, 2.0, 0.0, 3f64.ln(), 0.3).unwrap()
    }

    #[test]
    fn starts_at_initial_datum() {
        let s = integrate_trajectory(&p4(), &[0.0, 1.0]).unwrap();
        assert_eq!(s[0], StateVector::initial(4));
    }

    #[test]
    fn methods_agree() {
        let p = p4();
        let grid = [0.1, 1.0, 10.0];
        let start = StateVector::initial(4);
        let a = integrate_from(&p, &start, &grid, Method::DenseExpm).unwrap();
        let b = integrate_from(&p, &start, &grid, Method::Implicit).unwrap();
        let c = integrate_from(&p, &start, &grid, Method::Uniformized).unwrap();
        for i in 0..3 {
            for (x, (y, z)) in a[i].to_vec().iter().zip(b[i].to_vec().iter().zip(c[i].to_vec())) {
                assert!((x - z).abs() <= 1e-11 * z.abs() + 1e-300);
                assert!((y - z).abs() <= 1e-7 * z.abs() + 1e-14);
            }
        }
    }

    #[test]
    fn mass_non_increasing() {
        let grid: Vec<f64> = (1..60).map(|i| 0.25 * i as f64).collect();
        let p = p4().with_n(15);
        let s = integrate_trajectory(&p, &grid).unwrap();
        for w in s.windows(2) {
            assert!(w[1].mass() <= w[0].mass() + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(integrate_trajectory(&p4(), &[1.0, 0.5]).is_err());
    }
}
