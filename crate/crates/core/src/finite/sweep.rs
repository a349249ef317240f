use rayon::prelude::*;

use super::solve::solve;
use crate::crn::ModelParams;
use crate::error::{Error, Result};
use crate::output::{num, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub sigma: Vec<f64>,
    pub pres: Vec<f64>,
    /// (1/N)·log(1/p_res − 1).
    pub log_odds: Vec<f64>,
    /// Per-point failures; the point holds NaN when present.
    pub errors: Vec<Option<Error>>,
    pub params: ModelParams,
}

impl SweepResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["sigma", "pres", "log_odds"]);
        for i in 0..self.sigma.len() {
            t.push(vec![num(self.sigma[i]), num(self.pres[i]), num(self.log_odds[i])]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.table().to_csv()
    }

    /// First σ where p_res drops through 1/2, by linear interpolation.
    pub fn half_crossing(&self) -> Option<f64> {
        for i in 1..self.sigma.len() {
            let (a, b) = (self.pres[i - 1], self.pres[i]);
            if (a - 0.5) * (b - 0.5) <= 0.0 && a != b {
                let f = (a - 0.5) / (a - b);
                return Some(self.sigma[i - 1] + f * (self.sigma[i] - self.sigma[i - 1]));
            }
        }
        None
    }
}

/// Exact p_res over a σ grid, in parallel; output order follows the grid.
pub fn sweep_sigma(template: &ModelParams, grid: &[f64]) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sigma_grid",
            reason: "must be nonempty".into(),
        });
    }
    let points: Vec<Result<(f64, f64)>> = grid
        .par_iter()
        .map(|&s| {
            let p = template.with_sigma(s);
            solve(&p).map(|sol| (sol.pres, sol.log_odds / p.n as f64))
        })
        .collect();
    let mut out = SweepResult {
        sigma: grid.to_vec(),
        pres: Vec::with_capacity(grid.len()),
        log_odds: Vec::with_capacity(grid.len()),
        errors: Vec::with_capacity(grid.len()),
        params: *template,
    };
    for r in points {
        match r {
            Ok((p, l)) => {
                out.pres.push(p);
                out.log_odds.push(l);
                out.errors.push(None);
            }
            Err(e) => {
                out.pres.push(f64::NAN);
                out.log_odds.push(f64::NAN);
                out.errors.push(Some(e));
            }
        }
    }
    Ok(out)
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2(delta: f64) -> ModelParams {
        ModelParams::with_b(20, 1.0, delta, 0.0, 3f64.ln(), 2f64.ln()).unwrap()
    }

    #[test]
    fn fig2_sigmoid() {
        let r = sweep_sigma(&fig2(2.0), &linspace(-2.0, 4.0, 121)).unwrap();
        assert!(r.pres[0] > 0.9);
        assert!(*r.pres.last().unwrap() < 0.1);
        for w in r.pres.windows(2) {
            assert!(w[1] < w[0]);
        }
        let sc = crate::analytic::sigma_c(2f64.ln(), &fig2(2.0)).unwrap();
        assert!((r.half_crossing().unwrap() - sc).abs() <= 0.15);
    }

    #[test]
    fn single_point() {
        let p = fig2(0.1).with_sigma(0.7);
        let r = sweep_sigma(&p, &[0.7]).unwrap();
        assert_eq!(r.pres.len(), 1);
        assert_eq!(r.pres[0], super::super::pres_exact(&p).unwrap());
        assert!(sweep_sigma(&p, &[]).is_err());
    }

    #[test]
    fn csv_header() {
        let r = sweep_sigma(&fig2(0.1), &[0.0, 1.0]).unwrap();
        assert!(r.to_csv().starts_with("sigma,pres,log_odds\n"));
    }
}
