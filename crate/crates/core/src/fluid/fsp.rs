use std::path::Path;

use serde::{Deserialize, Serialize};

use super::context::{BlockInputs, FaceKind, FspContext};
use super::sparse::{write_vector_market, Csr};
use crate::ale::{PlateSampler, StaggeredField, TransformCoeffs};
use crate::error::{FsiError, Result};
use crate::plate::GalerkinBasis;

pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

/// Fluid velocity on the reference grid, pressure multiplier and plate
/// velocity coefficients `β` (the interface trace).
#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    pub u: StaggeredField,
    /// Cell-centred, mean zero.
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
}

impl FluidState {
    pub fn zeros(ctx: &FspContext) -> Self {
        Self { u: StaggeredField::zeros(&ctx.grid), p: vec![0.0; ctx.grid.n_cells()], beta: vec![0.0; ctx.k] }
    }
}

/// Data handed from the structure step to the fluid step.
#[derive(Clone, Copy, Debug)]
pub struct FspInputs<'a> {
    /// `uⁿ` on all faces.
    pub u_prev: &'a StaggeredField,
    /// Coefficients of `η̃ⁿ` and `η̃ⁿ⁺¹`.
    pub eta_prev: &'a [f64],
    pub eta_next: &'a [f64],
    /// Coefficients of the average rate `∂̃tηⁿ⁺¹`.
    pub dteta_avg: &'a [f64],
    pub dt: f64,
    pub mu: f64,
    pub j_floor: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FspOptions {
    /// Debug hook: assemble the symmetric instead of the skew convection
    /// pair. Used to check that the verification suites catch it.
    #[serde(default)]
    pub corrupt_convection_sign: bool,
}

/// Assembled fluid step: `[Q Bᵀ; B 0] (u, β, p) = rhs` plus the blocks the
/// energy audit needs.
pub struct FspSystem {
    pub matrix: Csr,
    pub rhs: Vec<f64>,
    pub n_u: usize,
    pub k: usize,
    pub n_p: usize,
    /// Whether a mean-zero pressure multiplier row was appended.
    pub gauge: bool,
    pub dt: f64,
    pub mu: f64,
    /// Lumped masses on full faces with `Jⁿ` and `Jⁿ⁺¹`.
    pub mass_prev: Vec<f64>,
    pub mass_next: Vec<f64>,
    /// `2μ∫Jⁿ D:D` on full faces.
    pub viscous: Csr,
    /// Skew convection block on full faces.
    pub convection: Csr,
    /// Per cell: `|cell| Jⁿ (∇^{η̃ⁿ}·u)` as full-face entries.
    pub divergence: Vec<Vec<(usize, f64)>>,
    pub u_prev: StaggeredField,
    pub beta_tilde: Vec<f64>,
    pub j_min: f64,
    pub j_max: f64,
}

fn cell_transport(ctx: &FspContext, u: &StaggeredField, dteta_nodal: &[f64]) -> Vec<[f64; 3]> {
    let g = &ctx.grid;
    let (nxc, nyc, _) = g.cells();
    let s = PlateSampler::new(&g.plate, dteta_nodal);
    let rate: Vec<f64> = (0..nxc * nyc).map(|p| s.at_cell(p % nxc, p / nxc)[0]).collect();
    (0..g.n_cells())
        .map(|c| {
            let (i, j, k) = g.cell_ijk(c);
            let zp1 = g.cell_center(i, j, k)[2] + 1.0;
            [u.cell_avg(g, 0, i, j, k), u.cell_avg(g, 1, i, j, k), u.cell_avg(g, 2, i, j, k) - zp1 * rate[i + nxc * j]]
        })
        .collect()
}

/// Divergence rows `|cell| J (∇^η · u)` on full faces.
pub(crate) fn divergence_rows(ctx: &FspContext, co: &TransformCoeffs) -> Vec<Vec<(usize, f64)>> {
    let vol = ctx.grid.cell_volume();
    let mut buf = Vec::new();
    (0..ctx.grid.n_cells())
        .map(|c| {
            buf.clear();
            for i in 0..3 {
                co.gradient_row(c, i, i, &mut buf);
            }
            let w = vol * co.jac.at(&ctx.grid, c);
            let mut row: Vec<(usize, f64)> = buf.iter().map(|(f, v)| (*f, w * v)).collect();
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (f, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == f => last.1 += v,
                    _ => merged.push((f, v)),
                }
            }
            merged.retain(|(f, _)| ctx.kinds[*f] != FaceKind::Fixed);
            merged
        })
        .collect()
}

/// Assembles the fluid step. Gradients use `η̃ⁿ⁺¹`, weights and the
/// divergence constraint use `η̃ⁿ`, the transport field is `uⁿ − wⁿ⁺¹`.
pub fn assemble_fsp(
    ctx: &FspContext,
    basis: &GalerkinBasis,
    inp: &FspInputs<'_>,
    opts: FspOptions,
) -> Result<FspSystem> {
    if !(inp.dt > 0.0) || !(inp.mu >= 0.0) {
        return Err(FsiError::Parameter(format!("dt = {} and mu = {} must be positive", inp.dt, inp.mu)));
    }
    let eta_prev = basis.synthesize(inp.eta_prev);
    let eta_next = basis.synthesize(inp.eta_next);
    let co_prev = TransformCoeffs::with_stencil(ctx.stencil.clone(), &eta_prev, inp.j_floor)?;
    let co_next = TransformCoeffs::with_stencil(ctx.stencil.clone(), &eta_next, inp.j_floor)?;
    let rate = basis.synthesize(inp.dteta_avg);
    let transport = cell_transport(ctx, inp.u_prev, &rate);
    let (viscous, convection) = ctx.assemble_blocks(&BlockInputs {
        coeffs: &co_next,
        j_weight: &co_prev.jac,
        mu: inp.mu,
        transport: Some(&transport),
        corrupt_convection_sign: opts.corrupt_convection_sign,
    });
    let mass_prev = ctx.mass_diagonal(&eta_prev);
    let mass_next = ctx.mass_diagonal(&eta_next);
    let divergence = divergence_rows(ctx, &co_prev);

    let (n_u, k, n_p) = (ctx.n_u, ctx.k, ctx.grid.n_cells());
    let dt = inp.dt;
    let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(ctx.pattern.nnz() + 8 * n_p);
    let (mut er, mut ec) = (Vec::new(), Vec::new());
    for r in 0..ctx.pattern.n {
        let (s0, s1) = (ctx.pattern.ptr[r], ctx.pattern.ptr[r + 1]);
        if s0 == s1 {
            continue;
        }
        ctx.expand(r, &mut er);
        for s in s0..s1 {
            let c = ctx.pattern.idx[s];
            let mut v = viscous.val[s] + convection.val[s];
            if r == c {
                v += 0.5 * (mass_prev[r] + mass_next[r]) / dt;
            }
            ctx.expand(c, &mut ec);
            for &(ri, rw) in &er {
                for &(ci, cw) in &ec {
                    trip.push((ri, ci, rw * cw * v));
                }
            }
        }
    }
    for m in 0..k {
        trip.push((n_u + m, n_u + m, 1.0 / dt));
    }
    let mut colsum = vec![0.0; n_u + k];
    for (p, row) in divergence.iter().enumerate() {
        for &(f, v) in row {
            ctx.expand(f, &mut ec);
            for &(ci, cw) in &ec {
                trip.push((n_u + k + p, ci, cw * v));
                trip.push((ci, n_u + k + p, cw * v));
                colsum[ci] += cw * v;
            }
        }
    }
    let bnorm = divergence.iter().flatten().map(|e| e.1 * e.1).sum::<f64>().sqrt();
    let gauge = colsum.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-10 * bnorm;
    let n = n_u + k + n_p + usize::from(gauge);
    if gauge {
        let vol = ctx.grid.cell_volume();
        for p in 0..n_p {
            trip.push((n - 1, n_u + k + p, vol));
            trip.push((n_u + k + p, n - 1, vol));
        }
    }
    if trip.iter().any(|t| !t.2.is_finite()) {
        return Err(FsiError::Numeric("non-finite entry in the fluid system".into()));
    }
    let matrix = Csr::from_triplets(n, &trip);

    let mut rhs = vec![0.0; n];
    for (f, kind) in ctx.kinds.iter().enumerate() {
        if *kind == FaceKind::Fixed {
            continue;
        }
        let v = mass_prev[f] * inp.u_prev.data[f] / dt;
        if v != 0.0 {
            ctx.expand(f, &mut er);
            for &(ri, rw) in &er {
                rhs[ri] += rw * v;
            }
        }
    }
    for m in 0..k {
        rhs[n_u + m] += inp.dteta_avg[m] / dt;
    }
    Ok(FspSystem {
        matrix,
        rhs,
        n_u,
        k,
        n_p,
        gauge,
        dt,
        mu: inp.mu,
        mass_prev,
        mass_next,
        viscous,
        convection,
        divergence,
        u_prev: inp.u_prev.clone(),
        beta_tilde: inp.dteta_avg.to_vec(),
        j_min: co_prev.jac.j_min.min(co_next.jac.j_min),
        j_max: co_prev.jac.j_max.max(co_next.jac.j_max),
    })
}

#[derive(Clone, Debug)]
pub struct FspSolution {
    pub state: FluidState,
    /// `‖Ax − b‖ / ‖b‖`.
    pub residual: f64,
    /// `max_cells |∇^{η̃ⁿ}·u|`.
    pub div_residual: f64,
}

impl FspSystem {
    /// Largest entry of `C + Cᵀ` for the convection block.
    pub fn convection_skew_defect(&self) -> f64 {
        self.convection.max_sym_part()
    }

    /// Writes the system matrix and right-hand side in Matrix Market format.
    pub fn dump(&self, matrix: &Path, rhs: &Path) -> Result<()> {
        self.matrix.write_matrix_market(matrix)?;
        write_vector_market(rhs, &self.rhs)
    }

    pub fn divergence_of(&self, ctx: &FspContext, u: &StaggeredField) -> f64 {
        let vol = ctx.grid.cell_volume();
        self.divergence
            .iter()
            .map(|row| row.iter().map(|(f, v)| v * u.data[*f]).sum::<f64>().abs() / vol)
            .fold(0.0, f64::max)
    }

    /// `(lhs, rhs)` of `∫Jⁿ(u−uⁿ)·u + ½∫(Jⁿ⁺¹−Jⁿ)|u|² =
    /// ½∫(Jⁿ⁺¹|u|² + Jⁿ|u−uⁿ|² − Jⁿ|uⁿ|²)` with the lumped masses.
    pub fn time_term_identity(&self, u: &StaggeredField) -> (f64, f64) {
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for f in 0..u.data.len() {
            let (a, b) = (u.data[f], self.u_prev.data[f]);
            let (mp, mn) = (self.mass_prev[f], self.mass_next[f]);
            lhs += mp * (a - b) * a + 0.5 * (mn - mp) * a * a;
            rhs += 0.5 * (mn * a * a + mp * (a - b) * (a - b) - mp * b * b);
        }
        (lhs, rhs)
    }
}

/// Direct sparse solve of an assembled fluid step.
pub fn solve_fsp(ctx: &FspContext, sys: &FspSystem, tol: f64) -> Result<FspSolution> {
    let (x, residual) = ctx.lu.solve(&sys.matrix, &sys.rhs)?;
    if residual > tol {
        return Err(FsiError::Accuracy { residual, tolerance: tol });
    }
    let beta = x[sys.n_u..sys.n_u + sys.k].to_vec();
    let u = ctx.field_from(&x[..sys.n_u], &beta);
    let mut p = x[sys.n_u + sys.k..sys.n_u + sys.k + sys.n_p].to_vec();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    p.iter_mut().for_each(|v| *v -= mean);
    let div_residual = sys.divergence_of(ctx, &u);
    Ok(FspSolution { state: FluidState { u, p, beta }, residual, div_residual })
}
