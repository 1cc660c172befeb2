//! Clamped plate on a rectangle: grid, biharmonic stencil, eigenbasis.

pub mod banded;
pub mod basis;
pub mod biharmonic;
pub mod eigen;
pub mod grid;

pub use basis::GalerkinBasis;
pub use eigen::EigenMethod;
pub use grid::{PlateGrid, Stencils};
