//! Graph (Lagrangian–Eulerian) map from the reference box `Γ × (−1, 0)` to
//! the fluid domain under the plate, and the transformed differential
//! operators on the staggered reference grid.

mod grid;
mod map;
mod transform;

pub use grid::{PlateSampler, ReferenceGrid, StaggeredField, WallValues};
pub use map::{geometric_identity_check, le_map, le_velocity, le_velocity_field};
pub use transform::{
    raw_gradient, sym_gradient, transformed_divergence, transformed_gradient, GradientStencil, JacobianField, Tensor,
    TransformCoeffs, DEFAULT_J_FLOOR,
};
