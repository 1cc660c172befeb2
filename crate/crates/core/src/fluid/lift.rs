use super::context::{BlockInputs, FaceKind, FspContext};
use super::fsp::divergence_rows;
use super::sparse::{lu_solve, Csr};
use crate::ale::{StaggeredField, TransformCoeffs};
use crate::error::{FsiError, Result};
use crate::plate::GalerkinBasis;

const LIFT_DIV_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LiftResult {
    pub field: StaggeredField,
    /// Net flux `∫_Γ ψ` removed through the relief profile before lifting.
    pub removed_flux: f64,
    /// `max_cells |∇·u|` of the lifted field.
    pub div_residual: f64,
}

/// Divergence-free extension of `(0, 0, Σ ψ_m w_m)` on the interface,
/// zero on the walls and bottom.
pub fn lift_boundary(ctx: &FspContext, basis: &GalerkinBasis, psi: &[f64]) -> Result<LiftResult> {
    if psi.len() > ctx.k || basis.k() != ctx.k {
        return Err(FsiError::Parameter(format!("{} coefficients for {} modes", psi.len(), ctx.k)));
    }
    let top: Vec<f64> = (0..ctx.top_faces.len()).map(|t| ctx.top_value(t, psi)).collect();
    lift_top_values(ctx, &top)
}

/// Lifts arbitrary interface values (one per top face) by a discrete Stokes
/// solve on the undeformed box with unit viscosity. A nonzero net flux is
/// incompatible with incompressibility and rigid walls; it is removed first
/// along the relief profile `sin(πx/Lx) sin(πy/Ly)` and reported.
pub fn lift_top_values(ctx: &FspContext, top: &[f64]) -> Result<LiftResult> {
    let g = &ctx.grid;
    if top.len() != ctx.top_faces.len() {
        return Err(FsiError::Parameter(format!("{} interface values for {} faces", top.len(), ctx.top_faces.len())));
    }
    let area = g.plate.hx() * g.plate.hy();
    let (nxc, _, _) = g.cells();
    let relief: Vec<f64> = (0..top.len())
        .map(|t| {
            let c = g.cell_center(t % nxc, t / nxc, 0);
            (std::f64::consts::PI * c[0] / g.plate.lx).sin() * (std::f64::consts::PI * c[1] / g.plate.ly).sin()
        })
        .collect();
    let flux: f64 = top.iter().sum::<f64>() * area;
    let rflux: f64 = relief.iter().sum::<f64>() * area;
    let s = flux / rflux;
    let top: Vec<f64> = top.iter().zip(&relief).map(|(v, r)| v - s * r).collect();

    let mut known = StaggeredField::zeros(g);
    for (t, f) in ctx.top_faces.iter().enumerate() {
        known.data[*f] = top[t];
    }
    if top.iter().all(|v| *v == 0.0) {
        return Ok(LiftResult { field: known, removed_flux: flux, div_residual: 0.0 });
    }
    let zero = vec![0.0; g.plate.len()];
    let co = TransformCoeffs::with_stencil(ctx.stencil.clone(), &zero, f64::NEG_INFINITY)?;
    let (a, _) = ctx.assemble_blocks(&BlockInputs {
        coeffs: &co,
        j_weight: &co.jac,
        mu: 1.0,
        transport: None,
        corrupt_convection_sign: false,
    });
    let div = divergence_rows(ctx, &co);
    let (n_u, n_p) = (ctx.n_u, g.n_cells());
    let n = n_u + n_p + 1;
    let ag = a.matvec(&known.data);
    let mut trip = Vec::with_capacity(a.nnz() + 8 * n_p);
    let mut rhs = vec![0.0; n];
    for (f, kind) in ctx.kinds.iter().enumerate() {
        if let FaceKind::Free(i) = kind {
            rhs[*i] = -ag[f];
            for s in a.ptr[f]..a.ptr[f + 1] {
                if let FaceKind::Free(j) = ctx.kinds[a.idx[s]] {
                    trip.push((*i, j, a.val[s]));
                }
            }
        }
    }
    let vol = g.cell_volume();
    for (p, row) in div.iter().enumerate() {
        for &(f, v) in row {
            match ctx.kinds[f] {
                FaceKind::Free(i) => {
                    trip.push((n_u + p, i, v));
                    trip.push((i, n_u + p, v));
                }
                FaceKind::Top(_) => rhs[n_u + p] -= v * known.data[f],
                FaceKind::Fixed => {}
            }
        }
        trip.push((n - 1, n_u + p, vol));
        trip.push((n_u + p, n - 1, vol));
    }
    let (x, residual) = lu_solve(&Csr::from_triplets(n, &trip), &rhs)?;
    let mut field = known;
    for (f, kind) in ctx.kinds.iter().enumerate() {
        if let FaceKind::Free(i) = kind {
            field.data[f] = x[*i];
        }
    }
    let div_residual =
        div.iter().map(|row| row.iter().map(|(f, v)| v * field.data[*f]).sum::<f64>().abs() / vol).fold(0.0, f64::max);
    let scale = top.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if div_residual > LIFT_DIV_TOL * scale.max(1.0) || residual > 1e-10 {
        return Err(FsiError::Compatibility { mismatch: div_residual });
    }
    Ok(LiftResult { field, removed_flux: flux, div_residual })
}
