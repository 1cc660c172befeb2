use super::grid::{PlateSampler, ReferenceGrid, StaggeredField};
use super::transform::{transformed_divergence, TransformCoeffs};
use crate::error::Result;
use crate::plate::PlateGrid;

/// `A_η(X, z) = (X, (z+1) η(X) + z)`, with `η` interpolated bilinearly.
pub fn le_map(grid: &PlateGrid, eta: &[f64], x: [f64; 2], z: f64) -> [f64; 3] {
    let e = PlateSampler::new(grid, eta).value_at(x[0], x[1]);
    [x[0], x[1], (z + 1.0) * e + z]
}

/// `w^η = (z+1) ∂tη e₃`.
pub fn le_velocity(grid: &PlateGrid, dt_eta: &[f64], x: [f64; 2], z: f64) -> [f64; 3] {
    let v = PlateSampler::new(grid, dt_eta).value_at(x[0], x[1]);
    [0.0, 0.0, (z + 1.0) * v]
}

/// `w^η` on the staggered grid; its top-face values equal the plate
/// velocity averaged over each top face's four corner nodes.
pub fn le_velocity_field(grid: &ReferenceGrid, dt_eta: &[f64]) -> StaggeredField {
    let s = PlateSampler::new(&grid.plate, dt_eta);
    let mut f = StaggeredField::zeros(grid);
    let (nxc, nyc, nzc) = grid.cells();
    let hz = grid.h()[2];
    for b in 0..nyc {
        for a in 0..nxc {
            let v = s.at_cell(a, b)[0];
            for k in 0..=nzc {
                f.data[grid.face(2, a, b, k)] = (k as f64 * hz) * v;
            }
        }
    }
    f
}

/// `max_cells |∂tη − J (∇^η · w^η)_h|`.
pub fn geometric_identity_check(grid: &ReferenceGrid, eta_t: &[f64], eta: &[f64]) -> Result<f64> {
    let co = TransformCoeffs::new(grid, eta, f64::NEG_INFINITY)?;
    let w = le_velocity_field(grid, eta_t);
    let div = transformed_divergence(&co, &w, None);
    let s = PlateSampler::new(&grid.plate, eta_t);
    let (nxc, nyc, _) = grid.cells();
    let mut worst = 0.0f64;
    for (c, d) in div.iter().enumerate() {
        let p = c % (nxc * nyc);
        let et = s.at_cell(p % nxc, p / nxc)[0];
        worst = worst.max((et - co.jac.j[p] * d).abs());
    }
    Ok(worst)
}
