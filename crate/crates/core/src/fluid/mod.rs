//! Linear fluid step on the reference box with transformed operators.

mod audit;
mod context;
mod fsp;
mod lift;
pub mod sparse;

pub use audit::{fsp_energy_audit, FspAudit};
pub use context::{FaceKind, FspContext};
pub use fsp::{assemble_fsp, solve_fsp, FluidState, FspInputs, FspOptions, FspSolution, FspSystem, DEFAULT_SOLVER_TOL};
pub use lift::{lift_boundary, lift_top_values, LiftResult};
