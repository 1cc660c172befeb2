use super::{all_finite, finite, Defect};
use crate::error::Result;
use crate::plate::{PlateGrid, Stencils};

/// `Π = ν/4 I² − G/2 I − ∫hη` with `I = ∫|∇η|²` from edge differences,
/// which equals `−(η, Δ_h η)_h` for the 5-point Laplacian.
pub(super) struct Berger {
    grid: PlateGrid,
    nu: f64,
    g: f64,
    h: Vec<f64>,
}

impl Berger {
    pub fn new(grid: PlateGrid, nu: f64, g: f64, h: Vec<f64>) -> Self {
        Self { grid, nu, g, h }
    }

    pub fn defect(&self, lambda1: f64) -> Defect {
        let gp = self.g.max(0.0);
        if self.nu > 0.0 {
            Defect { theta: 0.0, gamma: 0.0, c0: gp * gp / (4.0 * self.nu) }
        } else {
            // I ≤ ‖Δη‖²/λ₁
            Defect { theta: gp / (2.0 * lambda1), gamma: 0.0, c0: 0.0 }
        }
    }

    fn lap_and_i(&self, eta: &[f64]) -> (Vec<f64>, f64) {
        let lap = Stencils::new(&self.grid).laplacian(eta);
        let i = -self.grid.inner(eta, &lap);
        (lap, i)
    }

    pub fn force(&self, eta: &[f64]) -> Result<Vec<f64>> {
        let (lap, i) = self.lap_and_i(eta);
        let coef = finite(self.nu * i - self.g, "Berger membrane coefficient")?;
        let out: Vec<f64> = lap.iter().zip(&self.h).map(|(l, h)| -coef * l - h).collect();
        all_finite(&out, "Berger force")?;
        Ok(out)
    }

    pub fn potential(&self, eta: &[f64]) -> Result<f64> {
        let (_, i) = self.lap_and_i(eta);
        let hterm = self.grid.inner(&self.h, eta);
        finite(0.25 * self.nu * i * i - 0.5 * self.g * i - hterm, "Berger potential")
    }
}
