//! The finite-N ladder: generator, exact response probability, trajectories,
//! σ sweeps and quasi-steady profiles.

mod generator;
mod profile;
mod solve;
mod sweep;
mod trajectory;

pub use generator::{build_generator, Generator};
pub use profile::{critical_profile, closed_form_profile, outer_subcritical, quasi_steady_profile, ProfileComparison};
pub use solve::{
    log_odds_exact, pres_exact, solve, solve_dense, structured_solve, total_probability, Solution, REFINE_TRIGGER,
};
pub use sweep::{linspace, sweep_sigma, SweepResult};
pub use trajectory::{integrate_from, integrate_trajectory, Method, StateVector, DENSE_EXPM_MAX_N};
