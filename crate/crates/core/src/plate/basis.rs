use std::path::Path;

use serde::{Deserialize, Serialize};

use super::biharmonic;
use super::eigen::{self, EigenMethod};
use super::grid::PlateGrid;
use crate::error::{FsiError, Result};

pub const CACHE_FORMAT_VERSION: u32 = 1;

/// Clamped-plate eigenbasis: `S w_i = ξ_i w_i`, `(w_i, w_j)_h = δ_ij`.
#[derive(Clone, Debug)]
pub struct GalerkinBasis {
    grid: PlateGrid,
    xi: Vec<f64>,
    /// Column-major, `k` columns of length `nx*ny`.
    modes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BasisCache {
    format_version: u32,
    grid: PlateGrid,
    xi: Vec<f64>,
    modes: Vec<f64>,
}

impl GalerkinBasis {
    pub fn build(grid: PlateGrid, k_max: usize) -> Result<Self> {
        Self::build_with(grid, k_max, EigenMethod::Auto)
    }

    pub fn build_with(grid: PlateGrid, k_max: usize, method: EigenMethod) -> Result<Self> {
        if k_max == 0 || k_max > grid.len() {
            return Err(FsiError::Parameter(format!("k_max = {k_max} must lie in 1..={}", grid.len())));
        }
        let band = biharmonic::assemble(&grid);
        let (xi, vecs) = eigen::smallest(&band, k_max, method)?;
        if let Some(i) = xi.iter().position(|x| !(*x > 0.0)) {
            return Err(FsiError::Eigensolver { index: i, detail: format!("non-positive eigenvalue {:e}", xi[i]) });
        }
        let scale = 1.0 / grid.cell_area().sqrt();
        let modes = vecs.as_slice().iter().map(|v| v * scale).collect();
        Ok(Self { grid, xi, modes })
    }

    pub fn grid(&self) -> &PlateGrid {
        &self.grid
    }

    pub fn k(&self) -> usize {
        self.xi.len()
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn mode(&self, i: usize) -> &[f64] {
        let n = self.grid.len();
        &self.modes[i * n..(i + 1) * n]
    }

    /// Restricts to the first `k` modes.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(FsiError::Parameter(format!("cannot truncate to {k} of {} modes", self.k())));
        }
        Ok(Self { grid: self.grid, xi: self.xi[..k].to_vec(), modes: self.modes[..k * self.grid.len()].to_vec() })
    }

    /// `((f, w_1)_h, …, (f, w_k)_h)`.
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        (0..self.k()).map(|i| self.grid.inner(f, self.mode(i))).collect()
    }

    /// `Σ c_i w_i` on the grid; `c` may be shorter than `k`.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (i, ci) in c.iter().enumerate() {
            if *ci != 0.0 {
                for (o, w) in out.iter_mut().zip(self.mode(i)) {
                    *o += ci * w;
                }
            }
        }
        out
    }

    /// `(Σ ξ_i^{s/2} c_i²)^{1/2}` for `s ∈ [-2, 2]`.
    pub fn spectral_norm(&self, c: &[f64], s: f64) -> Result<f64> {
        if !(-2.0..=2.0).contains(&s) {
            return Err(FsiError::Parameter(format!("Sobolev order {s} outside [-2, 2]")));
        }
        if c.len() > self.k() {
            return Err(FsiError::Parameter(format!("{} coefficients for a basis of {} modes", c.len(), self.k())));
        }
        Ok(self.spectral_norm_unchecked(c, s))
    }

    pub(crate) fn spectral_norm_unchecked(&self, c: &[f64], s: f64) -> f64 {
        c.iter().zip(&self.xi).map(|(c, x)| if s == 0.0 { c * c } else { x.powf(s / 2.0) * c * c }).sum::<f64>().sqrt()
    }

    /// `‖Δ_h w_i‖² / ‖w_i‖²`, evaluated with the stencil.
    pub fn rayleigh_quotient(&self, i: usize) -> f64 {
        let w = self.mode(i);
        biharmonic::laplacian_norm_sq(&self.grid, w) / self.grid.inner(w, w)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let cache = BasisCache {
            format_version: CACHE_FORMAT_VERSION,
            grid: self.grid,
            xi: self.xi.clone(),
            modes: self.modes.clone(),
        };
        std::fs::write(path, serde_json::to_vec(&cache)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cache: BasisCache = serde_json::from_slice(&std::fs::read(path)?)?;
        if cache.format_version != CACHE_FORMAT_VERSION {
            return Err(FsiError::Parameter(format!(
                "basis cache format {} (expected {CACHE_FORMAT_VERSION})",
                cache.format_version
            )));
        }
        let grid = PlateGrid::new(cache.grid.lx, cache.grid.ly, cache.grid.nx, cache.grid.ny)?;
        if cache.xi.is_empty() || cache.modes.len() != cache.xi.len() * grid.len() {
            return Err(FsiError::Parameter("basis cache has inconsistent sizes".into()));
        }
        Ok(Self { grid, xi: cache.xi, modes: cache.modes })
    }

    /// Loads `path` if it holds a basis for `grid` with at least `k` modes,
    /// otherwise builds one and writes it there.
    pub fn load_or_build(path: &Path, grid: PlateGrid, k: usize) -> Result<Self> {
        if let Ok(b) = Self::load(path) {
            if b.grid == grid && b.k() >= k {
                return b.truncate(k);
            }
        }
        let b = Self::build(grid, k)?;
        b.save(path)?;
        Ok(b)
    }
}
