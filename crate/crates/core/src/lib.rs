//! Stochastic kinetic-proofreading toolkit.
//!
//! A ligand binds a receptor and walks a ladder of `N` phosphorylation steps;
//! it triggers a response when it leaves the last rung before detaching or
//! degrading. The crate computes exact response probabilities for the finite
//! ladder, evaluates the closed-form large-`N` predictors and checks them
//! against lattice integration, Laplace inversion, transport PDEs, modified
//! networks and Monte Carlo.

pub mod acceptance;
pub mod analytic;
pub mod crn;
pub mod enlarged;
mod error;
pub mod finite;
pub mod fit;
pub mod half_line;
pub mod linalg;
pub mod mc;
pub mod output;
pub mod pde;
pub mod stiff;
pub mod variants;

pub use error::{Error, Result};
pub use crn::{Degradation, ModelParams};
