use std::sync::Arc;

use super::grid::{PlateSampler, ReferenceGrid, StaggeredField, WallValues};
use crate::error::{FsiError, Result};

pub const DEFAULT_J_FLOOR: f64 = 1e-3;

/// `t[i][j] = ∂_j f_i`.
pub type Tensor = [[f64; 3]; 3];

/// `J = 1 + η` at the cell centres (constant along z).
#[derive(Clone, Debug)]
pub struct JacobianField {
    /// Per plate cell `(a, b)`, index `a + (nx+1) b`.
    pub j: Vec<f64>,
    pub j_min: f64,
    pub j_max: f64,
    pub eta_ref: Vec<f64>,
}

impl JacobianField {
    /// Fails with a geometry error when `min J ≤ j_floor`. The extremes are
    /// taken over the plate nodes, ring included.
    pub fn new(grid: &ReferenceGrid, eta: &[f64], j_floor: f64) -> Result<Self> {
        let s = PlateSampler::new(&grid.plate, eta);
        let (lo, hi) = s.min_max();
        let (j_min, j_max) = (1.0 + lo, 1.0 + hi);
        if !(j_min > j_floor) {
            return Err(FsiError::Geometry { j_min, j_floor });
        }
        let (nxc, nyc, _) = grid.cells();
        let mut j = Vec::with_capacity(nxc * nyc);
        for b in 0..nyc {
            for a in 0..nxc {
                j.push(1.0 + s.at_cell(a, b)[0]);
            }
        }
        Ok(Self { j, j_min, j_max, eta_ref: eta.to_vec() })
    }

    /// `J` at fluid cell `c`.
    #[inline]
    pub fn at(&self, grid: &ReferenceGrid, c: usize) -> f64 {
        let (nxc, nyc, _) = grid.cells();
        self.j[c % (nxc * nyc)]
    }
}

/// Raw gradient stencils on the staggered grid, independent of `η`.
///
/// `∂_i u_i` is the compact face difference. The other derivatives act on
/// the cell-averaged component: centred differences between neighbouring
/// cells, and at a boundary cell a difference against the wall value
/// (half a cell away). All of them are exact for linear fields.
#[derive(Clone, Debug)]
pub struct GradientStencil {
    grid: ReferenceGrid,
    ptr: Vec<usize>,
    entries: Vec<(usize, f64)>,
    /// `(high, coef)` of the wall value, per (cell, i, k).
    wall: Vec<Option<(bool, f64)>>,
}

impl GradientStencil {
    pub fn new(grid: &ReferenceGrid) -> Self {
        let (nxc, nyc, nzc) = grid.cells();
        let n = [nxc, nyc, nzc];
        let h = grid.h();
        let mut ptr = vec![0];
        let mut entries = Vec::new();
        let mut wall = Vec::new();
        let avg = |entries: &mut Vec<(usize, f64)>, comp: usize, c: [usize; 3], w: f64| {
            let mut hi = c;
            hi[comp] += 1;
            entries.push((grid.face(comp, c[0], c[1], c[2]), 0.5 * w));
            entries.push((grid.face(comp, hi[0], hi[1], hi[2]), 0.5 * w));
        };
        for ck in 0..nzc {
            for cj in 0..nyc {
                for ci in 0..nxc {
                    let c = [ci, cj, ck];
                    for i in 0..3 {
                        for k in 0..3 {
                            let mut wl = None;
                            if i == k {
                                let mut hi = c;
                                hi[i] += 1;
                                entries.push((grid.face(i, hi[0], hi[1], hi[2]), 1.0 / h[i]));
                                entries.push((grid.face(i, c[0], c[1], c[2]), -1.0 / h[i]));
                            } else {
                                let (mut up, mut dn) = (c, c);
                                up[k] = up[k].wrapping_add(1);
                                dn[k] = dn[k].wrapping_sub(1);
                                if c[k] > 0 && c[k] + 1 < n[k] {
                                    avg(&mut entries, i, up, 0.5 / h[k]);
                                    avg(&mut entries, i, dn, -0.5 / h[k]);
                                } else if c[k] == 0 {
                                    avg(&mut entries, i, up, 1.0 / (1.5 * h[k]));
                                    wl = Some((false, -1.0 / (1.5 * h[k])));
                                } else {
                                    avg(&mut entries, i, dn, -1.0 / (1.5 * h[k]));
                                    wl = Some((true, 1.0 / (1.5 * h[k])));
                                }
                            }
                            wall.push(wl);
                            ptr.push(entries.len());
                        }
                    }
                }
            }
        }
        Self { grid: *grid, ptr, entries, wall }
    }

    /// Entries of `∂_k u_i` at cell `c`.
    #[inline]
    pub fn row(&self, c: usize, i: usize, k: usize) -> &[(usize, f64)] {
        let r = 9 * c + 3 * i + k;
        &self.entries[self.ptr[r]..self.ptr[r + 1]]
    }

    pub fn grid(&self) -> &ReferenceGrid {
        &self.grid
    }
}

/// Raw (untransformed) discrete gradient at every cell centre.
pub fn raw_gradient(st: &GradientStencil, f: &StaggeredField, walls: Option<&dyn WallValues>) -> Vec<Tensor> {
    let g = st.grid;
    (0..g.n_cells())
        .map(|c| {
            let mut t = [[0.0; 3]; 3];
            for (i, ti) in t.iter_mut().enumerate() {
                for (k, tik) in ti.iter_mut().enumerate() {
                    let mut v: f64 = st.row(c, i, k).iter().map(|(d, w)| w * f.data[*d]).sum();
                    if let (Some(w), Some((high, coef))) = (walls, st.wall[9 * c + 3 * i + k]) {
                        v += coef * w.value(i, k, high, g.cell_ijk(c));
                    }
                    *tik = v;
                }
            }
            t
        })
        .collect()
}

/// Third row `Ā` of the inverse map Jacobian, per cell, for one plate
/// configuration: `∂ᵢ^η = ∂ᵢ + Āᵢ ∂_z` (i = 1, 2) and `∂_z^η = Ā₃ ∂_z`.
#[derive(Clone, Debug)]
pub struct TransformCoeffs {
    pub grid: ReferenceGrid,
    pub abar: Vec<[f64; 3]>,
    pub jac: JacobianField,
    pub stencil: Arc<GradientStencil>,
}

impl TransformCoeffs {
    pub fn new(grid: &ReferenceGrid, eta: &[f64], j_floor: f64) -> Result<Self> {
        Self::with_stencil(Arc::new(GradientStencil::new(grid)), eta, j_floor)
    }

    pub fn with_stencil(stencil: Arc<GradientStencil>, eta: &[f64], j_floor: f64) -> Result<Self> {
        let grid = *stencil.grid();
        let jac = JacobianField::new(&grid, eta, j_floor)?;
        let s = PlateSampler::new(&grid.plate, eta);
        let (nxc, nyc, nzc) = grid.cells();
        let plate: Vec<[f64; 3]> = (0..nxc * nyc).map(|p| s.at_cell(p % nxc, p / nxc)).collect();
        let mut abar = Vec::with_capacity(grid.n_cells());
        for k in 0..nzc {
            let zp1 = grid.cell_center(0, 0, k)[2] + 1.0;
            for [e, ex, ey] in &plate {
                let d = 1.0 + e;
                abar.push([-zp1 * ex / d, -zp1 * ey / d, 1.0 / d]);
            }
        }
        if abar.iter().flatten().any(|v| !v.is_finite()) {
            return Err(FsiError::Numeric("non-finite transform coefficients".into()));
        }
        Ok(Self { grid, abar, jac, stencil })
    }

    /// Sparse row of `(∇^η u)_{ij}` at cell `c`, appended to `out`.
    pub fn gradient_row(&self, c: usize, i: usize, j: usize, out: &mut Vec<(usize, f64)>) {
        let a = self.abar[c];
        if j < 2 {
            out.extend_from_slice(self.stencil.row(c, i, j));
            if a[j] != 0.0 {
                out.extend(self.stencil.row(c, i, 2).iter().map(|(d, w)| (*d, a[j] * w)));
            }
        } else {
            out.extend(self.stencil.row(c, i, 2).iter().map(|(d, w)| (*d, a[2] * w)));
        }
    }

    #[inline]
    pub fn transform(&self, c: usize, d: &Tensor) -> Tensor {
        let a = self.abar[c];
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            t[i][0] = d[i][0] + a[0] * d[i][2];
            t[i][1] = d[i][1] + a[1] * d[i][2];
            t[i][2] = a[2] * d[i][2];
        }
        t
    }
}

/// `∇^η f = ∇f (∇A_η)^{-1}` at every cell centre.
pub fn transformed_gradient(co: &TransformCoeffs, f: &StaggeredField, walls: Option<&dyn WallValues>) -> Vec<Tensor> {
    raw_gradient(&co.stencil, f, walls).iter().enumerate().map(|(c, d)| co.transform(c, d)).collect()
}

pub fn transformed_divergence(co: &TransformCoeffs, f: &StaggeredField, walls: Option<&dyn WallValues>) -> Vec<f64> {
    transformed_gradient(co, f, walls).iter().map(|t| t[0][0] + t[1][1] + t[2][2]).collect()
}

pub fn sym_gradient(co: &TransformCoeffs, f: &StaggeredField, walls: Option<&dyn WallValues>) -> Vec<Tensor> {
    transformed_gradient(co, f, walls)
        .iter()
        .map(|t| {
            let mut s = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    s[i][j] = 0.5 * (t[i][j] + t[j][i]);
                }
            }
            s
        })
        .collect()
}
