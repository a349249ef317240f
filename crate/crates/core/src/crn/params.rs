use crate::error::{invalid, Result};

/// How the degradation rate μ is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Degradation {
    /// μ = e^{−bN}.
    Exponent(f64),
    /// μ given directly.
    Rate(f64),
}

/// Scalar parameters of the ladder model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    pub sigma: f64,
    pub energy: f64,
    pub degradation: Degradation,
}

impl ModelParams {
    pub fn new(
        n: usize,
        alpha: f64,
        delta: f64,
        sigma: f64,
        energy: f64,
        degradation: Degradation,
    ) -> Result<Self> {
        let p = ModelParams {
            n,
            alpha,
            delta,
            sigma,
            energy,
            degradation,
        };
        p.validate()?;
        Ok(p)
    }

    /// Shorthand for the common `b`-parameterized case.
    pub fn with_b(n: usize, alpha: f64, delta: f64, sigma: f64, energy: f64, b: f64) -> Result<Self> {
        Self::new(n, alpha, delta, sigma, energy, Degradation::Exponent(b))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("N", "must be at least 1"));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(invalid("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if !(self.energy.is_finite() && self.energy > 0.0) {
            return Err(invalid("E", format!("must be positive, got {}", self.energy)));
        }
        if !self.delta.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        if !self.sigma.is_finite() {
            return Err(invalid("sigma", "must be finite"));
        }
        match self.degradation {
            Degradation::Exponent(b) if !b.is_finite() => Err(invalid("b", "must be finite")),
            Degradation::Rate(mu) if !(mu.is_finite() && mu > 0.0) => {
                Err(invalid("mu", format!("must be positive, got {mu}")))
            }
            _ => {
                let mu = self.mu();
                if mu > 0.0 && mu.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("b", format!("resolved mu = {mu} is not a positive number")))
                }
            }
        }
    }

    /// Resolved degradation rate.
    pub fn mu(&self) -> f64 {
        match self.degradation {
            Degradation::Exponent(b) => (-b * self.n as f64).exp(),
            Degradation::Rate(mu) => mu,
        }
    }

    /// The exponent `b` with μ = e^{−bN}, recovered from μ when given directly.
    pub fn b(&self) -> f64 {
        match self.degradation {
            Degradation::Exponent(b) => b,
            Degradation::Rate(mu) => -mu.ln() / self.n as f64,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Phosphorylation (and output) rate αe^Δ.
    pub fn k_phos(&self) -> f64 {
        self.alpha * self.delta.exp()
    }

    /// Dephosphorylation rate αe^E.
    pub fn k_dephos(&self) -> f64 {
        self.alpha * self.energy.exp()
    }

    /// Detachment rate e^σ.
    pub fn k_detach(&self) -> f64 {
        self.sigma.exp()
    }

    /// Attachment rate into C_k.
    pub fn k_attach(&self, k: usize) -> f64 {
        (-(k as f64) * self.energy).exp()
    }

    /// S_N(E) = (1 − e^{−NE})/(e^E − 1), total attachment out of S minus the C_0 term.
    pub fn attach_tail_sum(&self) -> f64 {
        let e = self.energy;
        -(-(self.n as f64) * e).exp_m1() / e.exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_from_b_is_exact() {
        let p = ModelParams::with_b(20, 1.0, 0.1, 0.0, 3f64.ln(), 2f64.ln()).unwrap();
        assert_eq!(p.mu(), (-20.0 * 2f64.ln()).exp());
        assert!((p.mu() - 2f64.powi(-20)).abs() < 1e-22);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ModelParams::with_b(0, 1.0, 0.0, 0.0, 1.0, 0.1).is_err());
        assert!(ModelParams::with_b(3, -1.0, 0.0, 0.0, 1.0, 0.1).is_err());
        assert!(ModelParams::with_b(3, 1.0, 0.0, 0.0, 0.0, 0.1).is_err());
        assert!(ModelParams::new(3, 1.0, 0.0, 0.0, 1.0, Degradation::Rate(0.0)).is_err());
        assert!(ModelParams::with_b(3, 1.0, f64::NAN, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn tail_sum_matches_direct_sum() {
        let p = ModelParams::with_b(7, 1.0, 0.0, 0.0, 0.7, 0.1).unwrap();
        let direct: f64 = (1..=7).map(|k| p.k_attach(k)).sum();
        assert!((p.attach_tail_sum() - direct).abs() < 1e-14);
    }
}
