use num_complex::Complex64;

use crate::crn::ModelParams;
use crate::error::{Error, Result};

/// Distance from the branch segment or a pole below which evaluation is refused.
pub const BRANCH_TOL: f64 = 1e-10;

/// Laplace-domain objects of the half-line model.
///
/// The square root in θ₁,₂ is taken as √(Ω−a)·√(Ω+a) with a = 2αe^{(Δ+E)/2},
/// each factor on the principal branch. This is the continuation of the
/// Bromwich-line root that is analytic off the real segment where
/// |Ω| < a, and keeps |θ₁| ≤ |θ₂| everywhere.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceKernel {
    pub alpha: f64,
    pub delta: f64,
    pub sigma: f64,
    pub energy: f64,
}

/// Kernel values at one point z.
#[derive(Debug, Clone, Copy)]
pub struct KernelValues {
    pub omega: Complex64,
    pub a: Complex64,
    pub ns_hat: Complex64,
    pub theta1: Complex64,
    pub theta2: Complex64,
    pub varphi: Complex64,
    pub b: Complex64,
}

impl LaplaceKernel {
    pub fn new(p: &ModelParams) -> Self {
        LaplaceKernel {
            alpha: p.alpha,
            delta: p.delta,
            sigma: p.sigma,
            energy: p.energy,
        }
    }

    fn root_scale(&self) -> f64 {
        2.0 * self.alpha * (0.5 * (self.delta + self.energy)).exp()
    }

    /// Pole of n̂_S other than 0.
    pub fn z_s(&self) -> f64 {
        -(1.0 / -(-self.energy).exp_m1() + self.sigma.exp())
    }

    /// Pole of A(z); removable for every n̂_k.
    pub fn z_a(&self) -> f64 {
        self.alpha * self.energy.exp_m1() * self.delta.exp_m1() - self.sigma.exp()
    }

    /// Real segment on which θ₁,₂ are discontinuous, as (left, right).
    pub fn branch_segment(&self) -> (f64, f64) {
        let (he, hd) = ((0.5 * self.energy).exp(), (0.5 * self.delta).exp());
        let es = self.sigma.exp();
        (
            -es - self.alpha * (he + hd) * (he + hd),
            -es - self.alpha * (he - hd) * (he - hd),
        )
    }

    /// Ω(z) = z + e^σ + αe^Δ + αe^E; vanishes at the segment midpoint.
    pub fn omega(&self, z: Complex64) -> Complex64 {
        z + self.sigma.exp() + self.alpha * (self.delta.exp() + self.energy.exp())
    }

    pub fn on_branch(&self, z: Complex64) -> bool {
        let (l, r) = self.branch_segment();
        let scale = 1.0 + l.abs();
        z.im.abs() <= BRANCH_TOL * scale && z.re >= l - BRANCH_TOL * scale && z.re <= r + BRANCH_TOL * scale
    }

    /// (θ₁, θ₂) with θ₁θ₂ = e^{Δ−E}.
    pub fn thetas(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        if self.on_branch(z) {
            return Err(Error::BranchCut { re: z.re, im: z.im });
        }
        let om = self.omega(z);
        let a = self.root_scale();
        let r = (om - a).sqrt() * (om + a).sqrt();
        let big = om + r;
        let theta2 = big / (2.0 * self.alpha * self.energy.exp());
        let theta1 = 2.0 * self.alpha * self.delta.exp() / big;
        Ok((theta1, theta2))
    }

    pub fn at(&self, z: Complex64) -> Result<KernelValues> {
        let (theta1, theta2) = self.thetas(z)?;
        let es = self.sigma.exp();
        let varphi = self.energy.exp() * theta1;
        let b = -self.alpha * self.energy.exp() * self.delta.exp_m1()
            / (z + es + self.alpha * self.delta.exp() - self.alpha * varphi);
        Ok(KernelValues {
            omega: self.omega(z),
            a: 1.0 / (z - self.z_a()),
            ns_hat: (z + es) / (z * (z - self.z_s())),
            theta1,
            theta2,
            varphi,
            b,
        })
    }

    fn nk_hat_raw(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let v = self.at(z)?;
        let decay = (-(k as f64) * self.energy).exp();
        Ok(v.a * v.ns_hat * decay * (1.0 + v.b * v.varphi.powu(k as u32)))
    }

    /// n̂_k(z) = A(z) n̂_S(z) e^{−kE}(1 + B(z)φ(z)^k).
    ///
    /// Near z_A the factor A blows up while 1 + Bφ^k vanishes; there the value
    /// is taken as the mean over a small circle, exact for analytic functions.
    pub fn nk_hat(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let tol = BRANCH_TOL * (1.0 + z.norm());
        if z.norm() < tol || (z - self.z_s()).norm() < tol {
            return Err(Error::BranchCut { re: z.re, im: z.im });
        }
        let za = self.z_a();
        let h = 1e-3 * (1.0 + za.abs());
        if (z - za).norm() < h {
            let m = 16;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut dacc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                let ang = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                let w = Complex64::from_polar(1.0, ang);
                let f = self.nk_hat_raw(k, za + w * h)?;
                acc += f;
                dacc += f / w;
            }
            // Circle means give the value and the derivative at z_A.
            let center = acc / m as f64;
            let d = dacc / (m as f64 * h);
            return Ok(center + d * (z - za));
        }
        self.nk_hat_raw(k, z)
    }
}
