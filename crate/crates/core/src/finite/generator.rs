use nalgebra::DMatrix;

use crate::crn::ModelParams;
use crate::error::Result;

/// dn/dt = A·n for the state (n_S, n_0, …, n_N).
///
/// A is an arrowhead matrix: the S row and S column are dense, the block on
/// the complexes is tridiagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub n: usize,
    /// A[S, S].
    pub s_diag: f64,
    /// A[S, C_k] = e^σ for every k.
    pub detach: f64,
    /// A[C_k, S] = e^{−kE}, k = 0..N.
    pub attach: Vec<f64>,
    /// A[C_{k+1}, C_k] = αe^Δ, k = 0..N−1.
    pub lower: Vec<f64>,
    /// A[C_k, C_k], k = 0..N.
    pub diag: Vec<f64>,
    /// A[C_k, C_{k+1}] = αe^E, k = 0..N−1.
    pub upper: Vec<f64>,
    pub mu: f64,
    pub out_rate: f64,
}

pub fn build_generator(p: &ModelParams) -> Result<Generator> {
    p.validate()?;
    let n = p.n;
    let mu = p.mu();
    let (kd, kp, km) = (p.k_detach(), p.k_phos(), p.k_dephos());
    let diag = (0..=n)
        .map(|k| -(kd + kp + mu + if k > 0 { km } else { 0.0 }))
        .collect();
    Ok(Generator {
        n,
        s_diag: -(1.0 + p.attach_tail_sum() + mu),
        detach: kd,
        attach: (0..=n).map(|k| p.k_attach(k)).collect(),
        lower: vec![kp; n],
        diag,
        upper: vec![km; n],
        mu,
        out_rate: kp,
    })
}

impl Generator {
    pub fn dim(&self) -> usize {
        self.n + 2
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut a = DMatrix::zeros(d, d);
        a[(0, 0)] = self.s_diag;
        for k in 0..=self.n {
            a[(0, k + 1)] = self.detach;
            a[(k + 1, 0)] = self.attach[k];
            a[(k + 1, k + 1)] = self.diag[k];
        }
        for k in 0..self.n {
            a[(k + 2, k + 1)] = self.lower[k];
            a[(k + 1, k + 2)] = self.upper[k];
        }
        a
    }

    /// y = A·x in O(N).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let xs = x[0];
        let c = &x[1..];
        y[0] = self.s_diag * xs + self.detach * c.iter().sum::<f64>();
        for k in 0..=n {
            let mut v = self.attach[k] * xs + self.diag[k] * c[k];
            if k > 0 {
                v += self.lower[k - 1] * c[k - 1];
            }
            if k < n {
                v += self.upper[k] * c[k + 1];
            }
            y[k + 1] = v;
        }
    }

    /// Largest exit rate, a valid uniformization constant.
    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(-self.s_diag, |m, d| m.max(-d))
    }

    /// 1ᵀA per column.
    pub fn column_sums(&self) -> Vec<f64> {
        let a = self.to_dense();
        (0..self.dim()).map(|j| a.column(j).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_sum_identity() {
        let p = ModelParams::with_b(7, 1.3, 0.8, 0.2, 0.9, 0.4).unwrap();
        let g = build_generator(&p).unwrap();
        let sums = g.column_sums();
        let mu = p.mu();
        for (j, s) in sums.iter().enumerate() {
            let expect = if j == g.n + 1 { -mu - p.k_phos() } else { -mu };
            assert!((s - expect).abs() < 1e-13, "column {j}");
        }
    }

    #[test]
    fn hand_expanded_n1() {
        let p = ModelParams::new(1, 1.0, 0.0, 0.0, 1.0, crate::crn::Degradation::Rate(0.1)).unwrap();
        let a = build_generator(&p).unwrap().to_dense();
        let e = 1f64.exp();
        let s1 = (1.0 - (-1f64).exp()) / (e - 1.0);
        let expect = [
            [-(1.0 + s1 + 0.1), 1.0, 1.0],
            [1.0, -(1.0 + 1.0 + 0.1), e],
            [(-1f64).exp(), 1.0, -(1.0 + e + 1.0 + 0.1)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[(i, j)] - expect[i][j]).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn delta_only_moves_phosphorylation() {
        let p0 = ModelParams::with_b(4, 1.0, 0.0, 0.3, 0.7, 0.5).unwrap();
        let a0 = build_generator(&p0).unwrap().to_dense();
        let a1 = build_generator(&p0.with_delta(0.5)).unwrap().to_dense();
        let f = 0.5f64.exp();
        for k in 0..4 {
            let (i, j) = (k + 2, k + 1);
            assert!((a1[(i, j)] - f * a0[(i, j)]).abs() < 1e-15);
        }
        let diff = &a1 - &a0;
        for i in 0..6 {
            for j in 0..6 {
                let phos = i == j + 1 && j >= 1;
                if !phos && i != j {
                    assert_eq!(diff[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn apply_matches_dense() {
        let p = ModelParams::with_b(5, 0.8, 1.2, -0.3, 1.1, 0.2).unwrap();
        let g = build_generator(&p).unwrap();
        let x: Vec<f64> = (0..7).map(|i| 0.1 * i as f64 + 0.05).collect();
        let mut y = vec![0.0; 7];
        g.apply(&x, &mut y);
        let yd = g.to_dense() * nalgebra::DVector::from_vec(x);
        for i in 0..7 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
    }
}
