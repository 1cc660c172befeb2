use serde::{Deserialize, Serialize};

use super::{all_finite, finite, Defect};
use crate::error::Result;
use crate::plate::PlateGrid;

/// Built-in nonlinearities `f` with antiderivative `Φ`, `Φ(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearF {
    Linear { slope: f64 },
    Cubic { coef: f64 },
    Sine { amp: f64 },
}

impl NonlinearF {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            NonlinearF::Linear { slope } => slope * s,
            NonlinearF::Cubic { coef } => coef * s * s * s,
            NonlinearF::Sine { amp } => amp * s.sin(),
        }
    }

    pub fn antiderivative(&self, s: f64) -> f64 {
        match *self {
            NonlinearF::Linear { slope } => 0.5 * slope * s * s,
            NonlinearF::Cubic { coef } => 0.25 * coef * s.powi(4),
            NonlinearF::Sine { amp } => amp * (1.0 - s.cos()),
        }
    }

    /// `(γ, c)` with `Φ(s) ≥ −γ s²/2 − c` for all `s`.
    pub fn lower_bound(&self) -> (f64, f64) {
        match *self {
            NonlinearF::Linear { slope } => ((-slope).max(0.0), 0.0),
            NonlinearF::Cubic { .. } => (0.0, 0.0),
            NonlinearF::Sine { amp } => (0.0, 2.0 * (-amp).max(0.0)),
        }
    }
}

#[inline]
fn pow(t: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e.fract() == 0.0 && e <= 16.0 {
        t.powi(e as i32)
    } else {
        t.powf(e)
    }
}

/// `Π = ∫Φ(η) + ν/(q+2)∫|∇η|^{q+2} − νμ/(r+2)∫|∇η|^{r+2} − ∫hη`.
///
/// `∇η` lives at cell centres (average of the two edge differences in each
/// direction) and `∫` over gradients is the cell-midpoint rule over all
/// `(nx+1)(ny+1)` cells; nodal integrals use the node rule.
pub(super) struct Kirchhoff {
    grid: PlateGrid,
    nu: f64,
    q: f64,
    r: f64,
    mu: f64,
    f: NonlinearF,
    h: Vec<f64>,
}

impl Kirchhoff {
    pub fn new(grid: PlateGrid, nu: f64, q: f64, r: f64, mu: f64, f: NonlinearF, h: Vec<f64>) -> Self {
        Self { grid, nu, q, r, mu, f, h }
    }

    pub fn defect(&self) -> Defect {
        let (gamma, cf) = self.f.lower_bound();
        let mut c0 = cf * self.grid.area();
        if self.nu > 0.0 && self.mu > 0.0 {
            let (q, r) = (self.q, self.r);
            let m = self.mu.powf((q + 2.0) / (q - r)) * (1.0 / (q + 2.0) - 1.0 / (r + 2.0));
            c0 -= self.nu * m * self.grid.area();
        }
        Defect { theta: 0.0, gamma, c0 }
    }

    /// Visits every cell with its centre gradient; `visit` returns the flux
    /// `∂(density)/∂g`, which is scattered back to the corner nodes.
    fn cells(&self, eta: &[f64], out: Option<&mut Vec<f64>>) -> f64 {
        let g = &self.grid;
        let (hx, hy) = (g.hx(), g.hy());
        let (nx, ny) = (g.nx as isize, g.ny as isize);
        let (nu, q, r, mu) = (self.nu, self.q, self.r, self.mu);
        let mut energy = 0.0;
        let mut out = out;
        for b in 0..=ny {
            for a in 0..=nx {
                let e00 = g.ext(eta, a, b);
                let e10 = g.ext(eta, a + 1, b);
                let e01 = g.ext(eta, a, b + 1);
                let e11 = g.ext(eta, a + 1, b + 1);
                let gx = (e10 - e00 + e11 - e01) / (2.0 * hx);
                let gy = (e01 - e00 + e11 - e10) / (2.0 * hy);
                let t = (gx * gx + gy * gy).sqrt();
                energy += nu * pow(t, q + 2.0) / (q + 2.0) - nu * mu * pow(t, r + 2.0) / (r + 2.0);
                if let Some(out) = out.as_deref_mut() {
                    let phi = nu * pow(t, q) - nu * mu * pow(t, r);
                    let (fx, fy) = (phi * gx / (2.0 * hx), phi * gy / (2.0 * hy));
                    let mut put = |i: isize, j: isize, v: f64| {
                        if i >= 1 && j >= 1 && i <= nx && j <= ny {
                            out[(i - 1) as usize + g.nx * (j - 1) as usize] += v;
                        }
                    };
                    put(a, b, -fx - fy);
                    put(a + 1, b, fx - fy);
                    put(a, b + 1, -fx + fy);
                    put(a + 1, b + 1, fx + fy);
                }
            }
        }
        energy * g.cell_area()
    }

    pub fn force(&self, eta: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; eta.len()];
        if self.nu != 0.0 {
            self.cells(eta, Some(&mut out));
            all_finite(&out, "Kirchhoff divergence term")?;
        }
        for ((o, e), h) in out.iter_mut().zip(eta).zip(&self.h) {
            *o += self.f.eval(*e) - h;
        }
        all_finite(&out, "Kirchhoff f(eta) term")?;
        Ok(out)
    }

    pub fn potential(&self, eta: &[f64]) -> Result<f64> {
        let grad = if self.nu != 0.0 { finite(self.cells(eta, None), "Kirchhoff gradient energy")? } else { 0.0 };
        let nodal: f64 = eta.iter().zip(&self.h).map(|(e, h)| self.f.antiderivative(*e) - h * e).sum();
        finite(grad + self.grid.cell_area() * nodal, "Kirchhoff potential")
    }
}
