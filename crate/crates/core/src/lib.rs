//! Lie-splitting solver for a nonlinear clamped plate coupled to
//! incompressible Navier–Stokes flow in the box beneath it.

pub mod ale;
pub mod config;
pub mod error;
pub mod exec;
pub mod fluid;
pub mod harness;
pub mod models;
pub mod output;
pub mod plate;
pub mod splitting;

pub use error::{FsiError, Result};
pub use exec::ExecMode;
