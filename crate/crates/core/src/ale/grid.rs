use crate::error::{FsiError, Result};
use crate::plate::PlateGrid;

/// Staggered (MAC) grid on the reference box `[0,Lx] × [0,Ly] × [−1,0]`.
///
/// The cells are the `(nx+1) × (ny+1)` plate cells extruded over `nz`
/// layers, so plate nodes sit on cell corners of the top plane. `u1` lives
/// on x-faces, `u2` on y-faces, `u3` on z-faces and `p` at cell centres;
/// the face arrays include the wall faces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceGrid {
    pub plate: PlateGrid,
    pub nz: usize,
}

impl ReferenceGrid {
    pub fn new(plate: PlateGrid, nz: usize) -> Result<Self> {
        if nz < 4 {
            return Err(FsiError::Parameter(format!("nz = {nz} must be at least 4")));
        }
        Ok(Self { plate, nz })
    }

    /// Cell counts `(Nx, Ny, Nz)`.
    pub fn cells(&self) -> (usize, usize, usize) {
        (self.plate.nx + 1, self.plate.ny + 1, self.nz)
    }

    pub fn n_cells(&self) -> usize {
        let (a, b, c) = self.cells();
        a * b * c
    }

    pub fn h(&self) -> [f64; 3] {
        [self.plate.hx(), self.plate.hy(), 1.0 / self.nz as f64]
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.h();
        h[0] * h[1] * h[2]
    }

    /// Face-array shapes for components 0, 1, 2.
    pub fn face_shape(&self, comp: usize) -> [usize; 3] {
        let (a, b, c) = self.cells();
        match comp {
            0 => [a + 1, b, c],
            1 => [a, b + 1, c],
            _ => [a, b, c + 1],
        }
    }

    pub fn n_faces(&self, comp: usize) -> usize {
        let s = self.face_shape(comp);
        s[0] * s[1] * s[2]
    }

    /// Offset of component `comp` in the concatenated face vector.
    pub fn offset(&self, comp: usize) -> usize {
        (0..comp).map(|c| self.n_faces(c)).sum()
    }

    pub fn n_face_total(&self) -> usize {
        self.offset(3)
    }

    /// Index into the concatenated face vector.
    #[inline]
    pub fn face(&self, comp: usize, i: usize, j: usize, k: usize) -> usize {
        let s = self.face_shape(comp);
        self.offset(comp) + i + s[0] * (j + s[1] * k)
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize, k: usize) -> usize {
        let (a, b, _) = self.cells();
        i + a * (j + b * k)
    }

    pub fn cell_ijk(&self, c: usize) -> (usize, usize, usize) {
        let (a, b, _) = self.cells();
        (c % a, (c / a) % b, c / (a * b))
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.h();
        [(i as f64 + 0.5) * h[0], (j as f64 + 0.5) * h[1], -1.0 + (k as f64 + 0.5) * h[2]]
    }

    /// Position of face `(i, j, k)` of component `comp`.
    pub fn face_position(&self, comp: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.h();
        let mut p = [(i as f64 + 0.5) * h[0], (j as f64 + 0.5) * h[1], -1.0 + (k as f64 + 0.5) * h[2]];
        p[comp] -= 0.5 * h[comp];
        p
    }

    /// Whether face `(i, j, k)` of `comp` lies on a wall, bottom or top.
    pub fn is_boundary_face(&self, comp: usize, i: usize, j: usize, k: usize) -> bool {
        let s = self.face_shape(comp);
        let idx = [i, j, k][comp];
        idx == 0 || idx == s[comp] - 1
    }

    /// Top z-face `(i, j)` (the interface).
    pub fn top_face(&self, i: usize, j: usize) -> usize {
        self.face(2, i, j, self.nz)
    }
}

/// Tangential velocity prescribed on the walls, evaluated at the wall point
/// facing a boundary cell centre. `value(comp, dir, high, cell)` gives the
/// value of component `comp` on the wall normal to `dir` (`high` selects the
/// far wall) next to `cell`.
pub trait WallValues: Sync {
    fn value(&self, comp: usize, dir: usize, high: bool, cell: (usize, usize, usize)) -> f64;
}

/// Velocity on the staggered grid: the three concatenated face arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredField {
    pub data: Vec<f64>,
}

impl StaggeredField {
    pub fn zeros(grid: &ReferenceGrid) -> Self {
        Self { data: vec![0.0; grid.n_face_total()] }
    }

    /// Samples `f(x, y, z)[comp]` at every face of every component.
    pub fn sample(grid: &ReferenceGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(grid.n_face_total());
        for comp in 0..3 {
            let s = grid.face_shape(comp);
            for k in 0..s[2] {
                for j in 0..s[1] {
                    for i in 0..s[0] {
                        data.push(f(grid.face_position(comp, i, j, k))[comp]);
                    }
                }
            }
        }
        Self { data }
    }

    /// Cell average of component `comp` at cell `(i, j, k)`.
    #[inline]
    pub fn cell_avg(&self, grid: &ReferenceGrid, comp: usize, i: usize, j: usize, k: usize) -> f64 {
        let (a, b) = match comp {
            0 => (grid.face(0, i, j, k), grid.face(0, i + 1, j, k)),
            1 => (grid.face(1, i, j, k), grid.face(1, i, j + 1, k)),
            _ => (grid.face(2, i, j, k), grid.face(2, i, j, k + 1)),
        };
        0.5 * (self.data[a] + self.data[b])
    }
}

/// Evaluates a nodal plate field, its value and slopes, at the horizontal
/// positions used by the fluid stencils. Nodes are the extended plate
/// nodes (the clamped ring is zero with zero normal slope).
pub struct PlateSampler<'a> {
    pub grid: &'a PlateGrid,
    pub f: &'a [f64],
}

impl<'a> PlateSampler<'a> {
    pub fn new(grid: &'a PlateGrid, f: &'a [f64]) -> Self {
        Self { grid, f }
    }

    #[inline]
    fn e(&self, a: usize, b: usize) -> f64 {
        self.grid.ext(self.f, a as isize, b as isize)
    }

    /// Nodal slope `∂x` by central difference; the mirrored ghost across the
    /// clamped edge makes it vanish on the ring.
    fn node_dx(&self, a: usize, b: usize) -> f64 {
        let nx = self.grid.nx + 1;
        if a == 0 || a == nx {
            return 0.0;
        }
        (self.e(a + 1, b) - self.e(a - 1, b)) / (2.0 * self.grid.hx())
    }

    fn node_dy(&self, a: usize, b: usize) -> f64 {
        let ny = self.grid.ny + 1;
        if b == 0 || b == ny {
            return 0.0;
        }
        (self.e(a, b + 1) - self.e(a, b - 1)) / (2.0 * self.grid.hy())
    }

    /// `(f, ∂x f, ∂y f)` at the centre of plate cell `(a, b)`.
    pub fn at_cell(&self, a: usize, b: usize) -> [f64; 3] {
        let (e00, e10, e01, e11) = (self.e(a, b), self.e(a + 1, b), self.e(a, b + 1), self.e(a + 1, b + 1));
        [
            0.25 * (e00 + e10 + e01 + e11),
            (e10 - e00 + e11 - e01) / (2.0 * self.grid.hx()),
            (e01 - e00 + e11 - e10) / (2.0 * self.grid.hy()),
        ]
    }

    /// At the midpoint of the vertical cell edge `x = a hx`, `y = (b+½) hy`.
    pub fn at_xface(&self, a: usize, b: usize) -> [f64; 3] {
        [
            0.5 * (self.e(a, b) + self.e(a, b + 1)),
            0.5 * (self.node_dx(a, b) + self.node_dx(a, b + 1)),
            (self.e(a, b + 1) - self.e(a, b)) / self.grid.hy(),
        ]
    }

    /// At the midpoint `x = (a+½) hx`, `y = b hy`.
    pub fn at_yface(&self, a: usize, b: usize) -> [f64; 3] {
        [
            0.5 * (self.e(a, b) + self.e(a + 1, b)),
            (self.e(a + 1, b) - self.e(a, b)) / self.grid.hx(),
            0.5 * (self.node_dy(a, b) + self.node_dy(a + 1, b)),
        ]
    }

    /// Bilinear interpolation at an arbitrary point of the closed rectangle.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let (hx, hy) = (self.grid.hx(), self.grid.hy());
        let (mx, my) = (self.grid.nx + 1, self.grid.ny + 1);
        let sx = (x / hx).clamp(0.0, mx as f64);
        let sy = (y / hy).clamp(0.0, my as f64);
        let a = (sx.floor() as usize).min(mx - 1);
        let b = (sy.floor() as usize).min(my - 1);
        let (tx, ty) = (sx - a as f64, sy - b as f64);
        (1.0 - tx) * (1.0 - ty) * self.e(a, b)
            + tx * (1.0 - ty) * self.e(a + 1, b)
            + (1.0 - tx) * ty * self.e(a, b + 1)
            + tx * ty * self.e(a + 1, b + 1)
    }

    pub fn min_max(&self) -> (f64, f64) {
        // the ring contributes zero
        self.f.iter().fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
    }
}
