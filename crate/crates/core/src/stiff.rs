//! L-stable two-stage SDIRK integrator with Newton stages and step rejection.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, y: &[f64], out: &mut [f64]);
    fn jacobian(&self, y: &[f64]) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct Sdirk2 {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub max_steps: usize,
    /// Reject steps producing a component below −neg_tol·max|y|.
    pub neg_tol: f64,
}

impl Default for Sdirk2 {
    fn default() -> Self {
        Sdirk2 {
            rtol: 1e-10,
            atol: 1e-14,
            h0: 1e-4,
            max_steps: 2_000_000,
            neg_tol: 1e-13,
        }
    }
}

const GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

struct StepOut {
    y: Vec<f64>,
    err: f64,
}

impl Sdirk2 {
    /// Solutions at every time in `times` (increasing, starting at or after 0).
    pub fn integrate<S: OdeSystem>(&self, sys: &S, y0: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = sys.dim();
        if y0.len() != n {
            return Err(Error::Degenerate("initial state has wrong dimension".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
            return Err(Error::InvalidParameter {
                name: "times",
                reason: "must be nonnegative and increasing".into(),
            });
        }
        let mut out = Vec::with_capacity(times.len());
        let mut y = y0.to_vec();
        let mut t = 0.0;
        let mut h = self.h0;
        let mut steps = 0usize;
        for &target in times {
            while t < target {
                if steps >= self.max_steps {
                    return Err(Error::Stiffness(format!("step budget exhausted at t = {t}")));
                }
                let hs = h.min(target - t);
                let last = hs == target - t;
                match self.step(sys, &y, hs) {
                    Some(s) if s.err <= 1.0 && self.nonnegative(&s.y) => {
                        y = s.y;
                        t = if last { target } else { t + hs };
                        steps += 1;
                        let fac = if s.err == 0.0 { 5.0 } else { (0.9 * s.err.powf(-0.5)).clamp(0.2, 5.0) };
                        h = hs * fac;
                    }
                    Some(s) if s.err <= 1.0 => {
                        h = 0.5 * hs;
                    }
                    Some(s) => {
                        h = hs * (0.9 * s.err.powf(-0.5)).clamp(0.1, 0.5);
                    }
                    None => {
                        h = 0.25 * hs;
                    }
                }
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::Stiffness(format!(
                        "step size underflow at t = {t}; use the linear-solve path for long horizons"
                    )));
                }
            }
            out.push(y.clone());
        }
        Ok(out)
    }

    fn nonnegative(&self, y: &[f64]) -> bool {
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        y.iter().all(|v| *v >= -self.neg_tol * scale)
    }

    fn step<S: OdeSystem>(&self, sys: &S, y: &[f64], h: f64) -> Option<StepOut> {
        let n = y.len();
        let jac = sys.jacobian(y);
        let m = DMatrix::<f64>::identity(n, n) - jac * (h * GAMMA);
        let lu = m.lu();
        let mut f1 = vec![0.0; n];
        let y1 = self.stage(sys, &lu, y, h, &mut f1)?;
        let base: Vec<f64> = (0..n).map(|i| y[i] + h * (1.0 - GAMMA) * f1[i]).collect();
        let mut f2 = vec![0.0; n];
        let y2 = self.stage(sys, &lu, &base, h, &mut f2)?;
        let _ = y1;
        let est: Vec<f64> = (0..n).map(|i| h * GAMMA * (f2[i] - f1[i])).collect();
        let est = lu.solve(&DVector::from_vec(est))?;
        let mut acc = 0.0;
        for i in 0..n {
            let sc = self.atol + self.rtol * y[i].abs().max(y2[i].abs());
            acc += (est[i] / sc).powi(2);
        }
        Some(StepOut {
            y: y2,
            err: (acc / n as f64).sqrt(),
        })
    }

    /// Solve Y = base + hγ f(Y) by simplified Newton; leaves f(Y) in `f`.
    fn stage<S: OdeSystem>(
        &self,
        sys: &S,
        lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
        base: &[f64],
        h: f64,
        f: &mut [f64],
    ) -> Option<Vec<f64>> {
        let n = base.len();
        let mut yk = base.to_vec();
        for _ in 0..12 {
            sys.rhs(&yk, f);
            let res: Vec<f64> = (0..n).map(|i| base[i] + h * GAMMA * f[i] - yk[i]).collect();
            let d = lu.solve(&DVector::from_vec(res))?;
            let mut dn = 0.0f64;
            for i in 0..n {
                yk[i] += d[i];
                let sc = self.atol + self.rtol * yk[i].abs();
                dn = dn.max(d[i].abs() / sc);
            }
            if !dn.is_finite() {
                return None;
            }
            if dn < 1e-3 {
                sys.rhs(&yk, f);
                return Some(yk);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear(DMatrix<f64>);

    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn rhs(&self, y: &[f64], out: &mut [f64]) {
            let r = &self.0 * DVector::from_column_slice(y);
            out.copy_from_slice(r.as_slice());
        }
        fn jacobian(&self, _: &[f64]) -> DMatrix<f64> {
            self.0.clone()
        }
    }

    #[test]
    fn stiff_linear_matches_expm() {
        let a = DMatrix::from_row_slice(2, 2, &[-1000.0, 1.0, 999.0, -1.0]);
        let sys = Linear(a.clone());
        let y0 = [1.0, 0.0];
        let out = Sdirk2::default().integrate(&sys, &y0, &[0.5, 5.0]).unwrap();
        for (k, &t) in [0.5, 5.0].iter().enumerate() {
            let e = crate::linalg::expm_apply(&a, t, &y0);
            for i in 0..2 {
                assert!((out[k][i] - e[i]).abs() < 1e-7 * (1.0 + e[i].abs()));
            }
        }
    }

    struct Decay;
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, y: &[f64], out: &mut [f64]) {
            out[0] = -y[0] * y[0];
        }
        fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
            DMatrix::from_element(1, 1, -2.0 * y[0])
        }
    }

    #[test]
    fn nonlinear_decay() {
        let out = Sdirk2::default().integrate(&Decay, &[1.0], &[9.0]).unwrap();
        assert!((out[0][0] - 0.1).abs() < 1e-8);
    }
}
