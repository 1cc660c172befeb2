use super::banded::SymBand;
use super::grid::{PlateGrid, Stencils};

/// Weight of a boundary-edge row of the extended Laplacian (trapezoid rule).
pub const EDGE_WEIGHT: f64 = 0.5;

/// Laplacian extended onto the boundary ring.
///
/// On the clamped edge the displacement and the normal slope vanish, so the
/// ghost value across the edge mirrors the first interior value and the
/// Laplacian there reduces to `2 w_1 / h²`. Corner rows are identically zero
/// and are not stored. Layout: `nx*ny` interior rows, then the left, right,
/// bottom and top edges.
pub fn extended_laplacian(grid: &PlateGrid, f: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut out = Stencils::new(grid).laplacian(f);
    out.reserve(2 * (nx + ny));
    let (ax, ay) = (2.0 / (grid.hx() * grid.hx()), 2.0 / (grid.hy() * grid.hy()));
    out.extend((0..ny).map(|j| ax * f[grid.idx(0, j)]));
    out.extend((0..ny).map(|j| ax * f[grid.idx(nx - 1, j)]));
    out.extend((0..nx).map(|i| ay * f[grid.idx(i, 0)]));
    out.extend((0..nx).map(|i| ay * f[grid.idx(i, ny - 1)]));
    out
}

/// Transpose of [`extended_laplacian`].
pub fn extended_laplacian_t(grid: &PlateGrid, r: &[f64]) -> Vec<f64> {
    let (nx, ny, n) = (grid.nx, grid.ny, grid.len());
    let mut out = Stencils::new(grid).laplacian(&r[..n]);
    let (ax, ay) = (2.0 / (grid.hx() * grid.hx()), 2.0 / (grid.hy() * grid.hy()));
    let mut off = n;
    for j in 0..ny {
        out[grid.idx(0, j)] += ax * r[off + j];
    }
    off += ny;
    for j in 0..ny {
        out[grid.idx(nx - 1, j)] += ax * r[off + j];
    }
    off += ny;
    for i in 0..nx {
        out[grid.idx(i, 0)] += ay * r[off + i];
    }
    off += nx;
    for i in 0..nx {
        out[grid.idx(i, ny - 1)] += ay * r[off + i];
    }
    out
}

/// Row weights matching the layout of [`extended_laplacian`].
pub fn row_weights(grid: &PlateGrid) -> Vec<f64> {
    let mut w = vec![1.0; grid.len()];
    w.resize(grid.len() + 2 * (grid.nx + grid.ny), EDGE_WEIGHT);
    w
}

/// `‖Δ_h f‖²` in the discrete L² norm, boundary edges included.
pub fn laplacian_norm_sq(grid: &PlateGrid, f: &[f64]) -> f64 {
    let g = extended_laplacian(grid, f);
    let w = row_weights(grid);
    grid.cell_area() * g.iter().zip(&w).map(|(v, w)| w * v * v).sum::<f64>()
}

/// `S f = Gᵀ W G f`, the clamped biharmonic (13-point stencil) without the
/// quadrature factor.
pub fn apply(grid: &PlateGrid, f: &[f64]) -> Vec<f64> {
    let mut g = extended_laplacian(grid, f);
    for (v, w) in g.iter_mut().zip(row_weights(grid)) {
        *v *= w;
    }
    extended_laplacian_t(grid, &g)
}

/// Assembles `S` in symmetric band storage (bandwidth `2 nx`).
pub fn assemble(grid: &PlateGrid) -> SymBand {
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let (ax, ay) = (1.0 / (grid.hx() * grid.hx()), 1.0 / (grid.hy() * grid.hy()));
    let c = -2.0 * (ax + ay);
    let lap = [(0, 0, c), (1, 0, ax), (-1, 0, ax), (0, 1, ay), (0, -1, ay)];
    let inside = |i: isize, j: isize| i >= 0 && j >= 0 && i < nx && j < ny;
    let mut band = SymBand::zeros(grid.len(), 2 * grid.nx);
    for j in 0..ny {
        for i in 0..nx {
            let p = (i + nx * j) as usize;
            for &(di, dj, a) in &lap {
                let (ri, rj) = (i + di, j + dj);
                if !inside(ri, rj) {
                    continue;
                }
                for &(ei, ej, b) in &lap {
                    let (qi, qj) = (ri + ei, rj + ej);
                    if !inside(qi, qj) {
                        continue;
                    }
                    let q = (qi + nx * qj) as usize;
                    if q <= p {
                        band.add(p, q, a * b);
                    }
                }
            }
            let mut e = 0.0;
            if i == 0 || i == nx - 1 {
                e += 2.0 * ax * ax;
            }
            if j == 0 || j == ny - 1 {
                e += 2.0 * ay * ay;
            }
            band.add(p, p, e);
        }
    }
    band
}
