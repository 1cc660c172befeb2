//! Lie splitting: structure step, then fluid step, on each sub-interval.

mod driver;
mod ledger;
pub mod ode;
mod plan;
mod ssp;

pub use driver::{run, InitialState, Outcome, RunOptions, RunResult, Setup, Snapshot};
pub use ledger::{
    mismatch_report, telescoping, uniform_bound, EnergyLedger, LedgerRow, MismatchReport, StepAudit, Telescoping,
    UniformBound, LEDGER_COLUMNS,
};
pub use plan::{compute_n_min, NMinBreakdown, PlanConstants, SplittingPlan, MAX_STEPS};
pub use ssp::{elastic_energy, ssp_energy, ssp_rate, ssp_step, SspEnergy, SspTrajectory, TrajectoryPoint};
