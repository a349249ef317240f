//! Small dense and structured linear-algebra kernels.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solve a tridiagonal system by elimination without pivoting.
///
/// `lower[i]` sits at (i+1, i), `upper[i]` at (i, i+1). Stable for matrices
/// that are diagonally dominant by rows or by columns.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() + 1 != n.max(1) || upper.len() + 1 != n.max(1) || rhs.len() != n {
        return Err(Error::Degenerate("tridiagonal dimensions disagree".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return Err(Error::Degenerate("zero pivot in tridiagonal solve".into()));
    }
    if n > 1 {
        c[0] = upper[0] / piv;
    }
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i - 1] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::Degenerate("zero pivot in tridiagonal solve".into()));
        }
        if i + 1 < n {
            c[i] = upper[i] / piv;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Dense solve with partial pivoting.
pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let lu = a.clone().lu();
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.as_slice().to_vec())
        .ok_or_else(|| Error::Degenerate("singular dense system".into()))
}

/// exp(A)·v through the matrix exponential.
pub fn expm_apply(a: &DMatrix<f64>, t: f64, v: &[f64]) -> Vec<f64> {
    let e = (a * t).exp();
    (e * DVector::from_column_slice(v)).as_slice().to_vec()
}

/// e^{tA}v for a Metzler matrix A (nonnegative off-diagonal) by uniformization.
///
/// `apply` computes y = A·x; `rate` must bound every −A_ii. All partial sums
/// are nonnegative combinations for nonnegative v, so small components keep
/// full relative accuracy.
pub fn uniformized_expmv<F>(apply: F, rate: f64, t: f64, v: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = v.len();
    if t == 0.0 || rate == 0.0 {
        return v.to_vec();
    }
    // Split long horizons so the Poisson weights stay representable.
    let lt_total = rate * t;
    let chunks = (lt_total / 500.0).ceil().max(1.0) as usize;
    let lt = lt_total / chunks as f64;
    let mut cur = v.to_vec();
    let mut tmp = vec![0.0; n];
    for _ in 0..chunks {
        let mut term = cur.clone();
        let mut out = vec![0.0; n];
        let mut logw = -lt;
        let jmax = (lt + 12.0 * lt.sqrt() + 40.0) as usize;
        for j in 0..=jmax {
            if j > 0 {
                logw += lt.ln() - (j as f64).ln();
                apply(&term, &mut tmp);
                for i in 0..n {
                    term[i] += tmp[i] / rate;
                }
            }
            let w = logw.exp();
            for i in 0..n {
                out[i] += w * term[i];
            }
            if j as f64 > lt && w < 1e-18 {
                break;
            }
        }
        cur = out;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense() {
        let lower = [1.0, -0.5, 0.3];
        let diag = [4.0, 5.0, 3.0, 6.0];
        let upper = [0.2, 1.1, -0.7];
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = thomas(&lower, &diag, &upper, &rhs).unwrap();
        let mut a = DMatrix::zeros(4, 4);
        for i in 0..4 {
            a[(i, i)] = diag[i];
        }
        for i in 0..3 {
            a[(i + 1, i)] = lower[i];
            a[(i, i + 1)] = upper[i];
        }
        let y = dense_solve(&a, &rhs).unwrap();
        for i in 0..4 {
            assert!((x[i] - y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn uniformization_matches_expm() {
        let a = DMatrix::from_row_slice(3, 3, &[-2.0, 1.0, 0.5, 1.5, -1.0, 0.0, 0.5, 0.0, -0.5]);
        let v = [0.2, 0.3, 0.5];
        let apply = |x: &[f64], y: &mut [f64]| {
            let r = &a * DVector::from_column_slice(x);
            y.copy_from_slice(r.as_slice());
        };
        for &t in &[0.1, 1.0, 30.0, 700.0] {
            let u = uniformized_expmv(apply, 2.0, t, &v);
            let e = expm_apply(&a, t, &v);
            for i in 0..3 {
                assert!((u[i] - e[i]).abs() < 1e-12 * (1.0 + e[i].abs()), "t={t}");
            }
        }
    }
}
