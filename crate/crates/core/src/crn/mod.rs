//! Reaction networks: parameters, the ladder builder, the text format and cycle balance.

mod cycles;
mod network;
mod params;

pub use cycles::{basis_cycle, cycle_delta, cycle_log_ratio, wegscheider_holds, CycleReport, WEGSCHEIDER_TOL};
pub use network::{
    build_ladder, complex, NetworkSpec, Reaction, Side, ADP, ATP, DEGRADED, FREE, OUTPUT, PHOSPHATE,
};
pub use params::{Degradation, ModelParams};
