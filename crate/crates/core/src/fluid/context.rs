use std::sync::Arc;

use super::sparse::{Csr, LuCache};
use crate::ale::{GradientStencil, PlateSampler, ReferenceGrid, StaggeredField, TransformCoeffs};
use crate::error::Result;
use crate::exec::{self, ExecMode};
use crate::plate::GalerkinBasis;

/// Role of a velocity face in the fluid system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    /// Wall or bottom face: velocity zero.
    Fixed,
    /// Interior face: unknown number `i`.
    Free(usize),
    /// Interface face `t`: `u₃ = Σ β_m (E w_m)_t`.
    Top(usize),
}

/// Run-invariant structure of the fluid system: face roles, interface
/// evaluation matrix and the cell-by-cell assembly pattern.
pub struct FspContext {
    pub grid: ReferenceGrid,
    pub k: usize,
    pub stencil: Arc<GradientStencil>,
    pub kinds: Vec<FaceKind>,
    pub n_u: usize,
    /// Full face index of each interface face.
    pub top_faces: Vec<usize>,
    /// `E[t * k + m]`: mode `m` averaged over the corners of top face `t`.
    pub top_eval: Vec<f64>,
    /// Faces touched by each cell's stencils.
    pub(crate) cell_faces: Vec<Vec<usize>>,
    /// Stencil rows `(cell, i, k)` in cell-local face numbering.
    pub(crate) local_rows: Vec<Vec<(u16, f64)>>,
    /// Pattern over full faces; rows and columns of fixed faces are empty.
    pub(crate) pattern: Csr,
    /// Pattern slot of each local `(a, b)` pair, `usize::MAX` if fixed.
    pub(crate) slots: Vec<Vec<usize>>,
    pub mode: ExecMode,
    pub(crate) lu: LuCache,
}

impl FspContext {
    pub fn new(grid: ReferenceGrid, basis: &GalerkinBasis) -> Result<Self> {
        let stencil = Arc::new(GradientStencil::new(&grid));
        let (nxc, nyc, _) = grid.cells();
        let mut kinds = vec![FaceKind::Fixed; grid.n_face_total()];
        let mut n_u = 0;
        for comp in 0..3 {
            let s = grid.face_shape(comp);
            for kk in 0..s[2] {
                for j in 0..s[1] {
                    for i in 0..s[0] {
                        let f = grid.face(comp, i, j, kk);
                        if !grid.is_boundary_face(comp, i, j, kk) {
                            kinds[f] = FaceKind::Free(n_u);
                            n_u += 1;
                        }
                    }
                }
            }
        }
        let k = basis.k();
        let mut top_faces = Vec::with_capacity(nxc * nyc);
        let mut top_eval = Vec::with_capacity(nxc * nyc * k);
        for b in 0..nyc {
            for a in 0..nxc {
                let f = grid.top_face(a, b);
                kinds[f] = FaceKind::Top(top_faces.len());
                top_faces.push(f);
            }
        }
        let samplers: Vec<_> = (0..k).map(|m| PlateSampler::new(basis.grid(), basis.mode(m))).collect();
        for b in 0..nyc {
            for a in 0..nxc {
                top_eval.extend(samplers.iter().map(|s| s.at_cell(a, b)[0]));
            }
        }

        let n_cells = grid.n_cells();
        let mut cell_faces = Vec::with_capacity(n_cells);
        let mut local_rows = Vec::with_capacity(9 * n_cells);
        for c in 0..n_cells {
            let mut faces: Vec<usize> = (0..9).flat_map(|r| stencil.row(c, r / 3, r % 3).iter().map(|e| e.0)).collect();
            faces.sort_unstable();
            faces.dedup();
            for r in 0..9 {
                local_rows.push(
                    stencil
                        .row(c, r / 3, r % 3)
                        .iter()
                        .map(|(f, w)| (faces.binary_search(f).unwrap() as u16, *w))
                        .collect(),
                );
            }
            cell_faces.push(faces);
        }
        let mut pairs = Vec::new();
        for faces in &cell_faces {
            for &a in faces {
                if kinds[a] == FaceKind::Fixed {
                    continue;
                }
                for &b in faces {
                    if kinds[b] != FaceKind::Fixed {
                        pairs.push((a, b));
                    }
                }
            }
        }
        let pattern = Csr::pattern(grid.n_face_total(), pairs);
        let slots = cell_faces
            .iter()
            .map(|faces| {
                let mut s = Vec::with_capacity(faces.len() * faces.len());
                for &a in faces {
                    for &b in faces {
                        s.push(pattern.slot(a, b).unwrap_or(usize::MAX));
                    }
                }
                s
            })
            .collect();
        Ok(Self {
            grid,
            k,
            stencil,
            kinds,
            n_u,
            top_faces,
            top_eval,
            cell_faces,
            local_rows,
            pattern,
            slots,
            mode: ExecMode::default(),
            lu: LuCache::default(),
        })
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    /// `(E β)_t`, summed in mode order.
    #[inline]
    pub fn top_value(&self, t: usize, beta: &[f64]) -> f64 {
        let e = &self.top_eval[t * self.k..(t + 1) * self.k];
        let mut s = 0.0;
        for (m, b) in beta.iter().enumerate() {
            s += e[m] * b;
        }
        s
    }

    /// Unknown-space expansion of a full face: `(unknown, coefficient)`.
    pub(crate) fn expand(&self, f: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        match self.kinds[f] {
            FaceKind::Fixed => {}
            FaceKind::Free(i) => out.push((i, 1.0)),
            FaceKind::Top(t) => {
                for m in 0..self.k {
                    out.push((self.n_u + m, self.top_eval[t * self.k + m]));
                }
            }
        }
    }

    /// Full staggered field from interior unknowns and interface coefficients.
    pub fn field_from(&self, x_u: &[f64], beta: &[f64]) -> StaggeredField {
        let mut f = StaggeredField::zeros(&self.grid);
        for (face, kind) in self.kinds.iter().enumerate() {
            f.data[face] = match *kind {
                FaceKind::Fixed => 0.0,
                FaceKind::Free(i) => x_u[i],
                FaceKind::Top(t) => self.top_value(t, beta),
            };
        }
        f
    }

    /// Lumped `J`-weighted mass per face for the plate configuration `eta`
    /// (nodal): `J` at the face's horizontal position times the dual volume.
    /// Interface faces carry half a cell.
    pub fn mass_diagonal(&self, eta: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let s = PlateSampler::new(&g.plate, eta);
        let vol = g.cell_volume();
        let mut m = vec![0.0; g.n_face_total()];
        for comp in 0..3 {
            let sh = g.face_shape(comp);
            for kk in 0..sh[2] {
                for j in 0..sh[1] {
                    for i in 0..sh[0] {
                        let f = g.face(comp, i, j, kk);
                        let w = match self.kinds[f] {
                            FaceKind::Fixed => continue,
                            FaceKind::Free(_) => vol,
                            FaceKind::Top(_) => 0.5 * vol,
                        };
                        let e = match comp {
                            0 => s.at_xface(i, j)[0],
                            1 => s.at_yface(i, j)[0],
                            _ => s.at_cell(i, j)[0],
                        };
                        m[f] = w * (1.0 + e);
                    }
                }
            }
        }
        m
    }

    /// Cell-local blocks of the viscous form `2μ ∫ J D(u):D(q)` and the
    /// skew convection pair `½∫J[(b·∇)u·q − (b·∇)q·u]`, scattered into the
    /// full-face pattern.
    pub(crate) fn assemble_blocks(&self, blk: &BlockInputs<'_>) -> (Csr, Csr) {
        let vol = self.grid.cell_volume();
        let n_cells = self.grid.n_cells();
        let locals = exec::map_range(self.mode, n_cells, |c| self.local_blocks(c, vol, blk));
        let mut a = self.pattern.clone();
        let mut cv = self.pattern.clone();
        for (c, (al, cl)) in locals.into_iter().enumerate() {
            for (s, (x, y)) in self.slots[c].iter().zip(al.iter().zip(&cl)) {
                if *s != usize::MAX {
                    a.val[*s] += x;
                    cv.val[*s] += y;
                }
            }
        }
        (a, cv)
    }

    fn local_blocks(&self, c: usize, vol: f64, blk: &BlockInputs<'_>) -> (Vec<f64>, Vec<f64>) {
        let nl = self.cell_faces[c].len();
        let co = blk.coeffs;
        let abar = co.abar[c];
        let w = vol * blk.j_weight.at(&self.grid, c);
        // transformed gradient rows, dense over local faces
        let mut g = vec![0.0; 9 * nl];
        for i in 0..3 {
            let d3 = &self.local_rows[9 * c + 3 * i + 2];
            for j in 0..3 {
                let row = &mut g[(3 * i + j) * nl..(3 * i + j + 1) * nl];
                if j < 2 {
                    for (l, v) in &self.local_rows[9 * c + 3 * i + j] {
                        row[*l as usize] += v;
                    }
                }
                for (l, v) in d3 {
                    row[*l as usize] += abar[j] * v;
                }
            }
        }
        let mut al = vec![0.0; nl * nl];
        if blk.mu != 0.0 {
            let mut d = vec![0.0; nl];
            for i in 0..3 {
                for j in 0..3 {
                    for l in 0..nl {
                        d[l] = 0.5 * (g[(3 * i + j) * nl + l] + g[(3 * j + i) * nl + l]);
                    }
                    let s = 2.0 * blk.mu * w;
                    for p in 0..nl {
                        if d[p] == 0.0 {
                            continue;
                        }
                        let dp = s * d[p];
                        for q in 0..nl {
                            al[p * nl + q] += dp * d[q];
                        }
                    }
                }
            }
        }
        let mut cl = vec![0.0; nl * nl];
        if let Some(b) = blk.transport {
            let bc = b[c];
            if bc != [0.0; 3] {
                let mut kl = vec![0.0; nl * nl];
                for i in 0..3 {
                    // (b·∇u)_i as a row over local faces
                    let mut r = vec![0.0; nl];
                    for j in 0..3 {
                        for l in 0..nl {
                            r[l] += bc[j] * g[(3 * i + j) * nl + l];
                        }
                    }
                    // tested against the cell average of q_i; the compact
                    // ∂ᵢqᵢ row touches exactly the two faces averaged
                    for (l, _) in &self.local_rows[9 * c + 3 * i + i] {
                        let p = *l as usize;
                        for q in 0..nl {
                            kl[p * nl + q] += 0.5 * w * r[q];
                        }
                    }
                }
                let sign = if blk.corrupt_convection_sign { 1.0 } else { -1.0 };
                for p in 0..nl {
                    for q in 0..nl {
                        cl[p * nl + q] = 0.5 * (kl[p * nl + q] + sign * kl[q * nl + p]);
                    }
                }
            }
        }
        (al, cl)
    }
}

/// Geometry and data feeding one block assembly.
pub(crate) struct BlockInputs<'a> {
    /// Transform used by the gradients (`η̃^{n+1}`).
    pub coeffs: &'a TransformCoeffs,
    /// Jacobian weight (`Jⁿ`).
    pub j_weight: &'a crate::ale::JacobianField,
    pub mu: f64,
    /// Cell-centred transport field `b`, or `None` for no convection.
    pub transport: Option<&'a [[f64; 3]]>,
    pub corrupt_convection_sign: bool,
}
