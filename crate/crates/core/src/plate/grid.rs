use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};

/// Uniform tensor grid on the rectangle `[0, lx] x [0, ly]`.
///
/// Only interior nodes carry unknowns; the boundary ring holds the clamped
/// values (zero displacement, zero normal slope) and is never stored.
/// Interior node `(i, j)` sits at `((i + 1) hx, (j + 1) hy)` and is stored at
/// flat index `i + nx * j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateGrid {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

impl PlateGrid {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(FsiError::Parameter(format!("plate grid needs at least 4x4 interior points, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(FsiError::Parameter(format!("plate side lengths must be positive, got {lx} x {ly}")));
        }
        Ok(Self { lx, ly, nx, ny })
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(1.0, 1.0, n, n)
    }

    pub fn hx(&self) -> f64 {
        self.lx / (self.nx + 1) as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / (self.ny + 1) as f64
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of one node (the diagonal of the mass matrix).
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    /// Coordinates of interior node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        ((i + 1) as f64 * self.hx(), (j + 1) as f64 * self.hy())
    }

    /// Value at extended node `(ei, ej)`, `0..=nx+1` by `0..=ny+1`; the ring
    /// is zero. Out-of-range indices also return zero.
    #[inline]
    pub fn ext(&self, f: &[f64], ei: isize, ej: isize) -> f64 {
        if ei <= 0 || ej <= 0 || ei > self.nx as isize || ej > self.ny as isize {
            0.0
        } else {
            f[(ei - 1) as usize + self.nx * (ej - 1) as usize]
        }
    }

    /// Samples `g(x, y)` at the interior nodes.
    pub fn sample(&self, g: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.node(i, j);
                out.push(g(x, y));
            }
        }
        out
    }

    /// Discrete L² inner product (nodal quadrature).
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.cell_area() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    pub fn same_as(&self, other: &PlateGrid) -> bool {
        self == other
    }

    /// Smallest eigenvalue of the 5-point Dirichlet Laplacian on this grid.
    pub fn dirichlet_lambda1(&self) -> f64 {
        let sx = (std::f64::consts::PI * self.hx() / (2.0 * self.lx)).sin();
        let sy = (std::f64::consts::PI * self.hy() / (2.0 * self.ly)).sin();
        4.0 * sx * sx / (self.hx() * self.hx()) + 4.0 * sy * sy / (self.hy() * self.hy())
    }
}

/// Second-order centered difference operators on interior nodes, with zero
/// values on the boundary ring.
pub struct Stencils<'a> {
    pub grid: &'a PlateGrid,
}

impl<'a> Stencils<'a> {
    pub fn new(grid: &'a PlateGrid) -> Self {
        Self { grid }
    }

    fn map(&self, op: impl Fn(isize, isize) -> f64) -> Vec<f64> {
        let g = self.grid;
        let mut out = vec![0.0; g.len()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                out[g.idx(i, j)] = op(i as isize + 1, j as isize + 1);
            }
        }
        out
    }

    pub fn dxx(&self, f: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let h2 = g.hx() * g.hx();
        self.map(|a, b| (g.ext(f, a + 1, b) - 2.0 * g.ext(f, a, b) + g.ext(f, a - 1, b)) / h2)
    }

    pub fn dyy(&self, f: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let h2 = g.hy() * g.hy();
        self.map(|a, b| (g.ext(f, a, b + 1) - 2.0 * g.ext(f, a, b) + g.ext(f, a, b - 1)) / h2)
    }

    pub fn dxy(&self, f: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let d = 4.0 * g.hx() * g.hy();
        self.map(|a, b| {
            (g.ext(f, a + 1, b + 1) - g.ext(f, a + 1, b - 1) - g.ext(f, a - 1, b + 1) + g.ext(f, a - 1, b - 1)) / d
        })
    }

    /// 5-point Dirichlet Laplacian.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let mut out = self.dxx(f);
        for (o, v) in out.iter_mut().zip(self.dyy(f)) {
            *o += v;
        }
        out
    }
}
