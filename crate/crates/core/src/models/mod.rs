//! Nonlinear elastic plate forces `F(η)` with potentials `Π(η)`, `Π' = F`.
//!
//! Every force is the exact gradient of its discrete potential in the grid
//! inner product, so `(F(η), ψ)_h` is the derivative of `Π` at `η` along `ψ`
//! up to rounding.

mod assumptions;
mod berger;
mod kirchhoff;
mod von_karman;

use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::plate::{GalerkinBasis, PlateGrid};

pub use assumptions::{AssumptionReport, CoercivityReport, Sampler};
pub use kirchhoff::NonlinearF;
pub use von_karman::{airy_solve, vk_bracket, AiryField};

/// Scalar field on the plate grid, described analytically.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `amp · sin(mx π x / Lx) · sin(my π y / Ly)`
    Sine {
        amp: f64,
        mx: u32,
        my: u32,
    },
    /// Smooth compact bump `amp · cos²(π r / 2 radius)` for `r < radius`.
    Bump {
        amp: f64,
        x0: f64,
        y0: f64,
        radius: f64,
    },
    /// Galerkin coefficients.
    Modes {
        coeffs: Vec<f64>,
    },
}

impl FieldSpec {
    pub fn sample(&self, basis: &GalerkinBasis) -> Result<Vec<f64>> {
        let g = basis.grid();
        use std::f64::consts::PI;
        Ok(match self {
            FieldSpec::Zero => vec![0.0; g.len()],
            FieldSpec::Constant { value } => vec![*value; g.len()],
            FieldSpec::Sine { amp, mx, my } => {
                let (lx, ly) = (g.lx, g.ly);
                g.sample(|x, y| amp * (*mx as f64 * PI * x / lx).sin() * (*my as f64 * PI * y / ly).sin())
            }
            FieldSpec::Bump { amp, x0, y0, radius } => {
                if !(*radius > 0.0) {
                    return Err(FsiError::Parameter(format!("bump radius {radius} must be positive")));
                }
                g.sample(|x, y| {
                    let r = ((x - x0).powi(2) + (y - y0).powi(2)).sqrt();
                    if r < *radius {
                        amp * (0.5 * PI * r / radius).cos().powi(2)
                    } else {
                        0.0
                    }
                })
            }
            FieldSpec::Modes { coeffs } => {
                if coeffs.len() > basis.k() {
                    return Err(FsiError::Parameter(format!(
                        "{} mode coefficients for a basis of {}",
                        coeffs.len(),
                        basis.k()
                    )));
                }
                basis.synthesize(coeffs)
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FieldSpec::Zero)
    }
}

/// Model selection as written in a configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Zero,
    Kirchhoff {
        nu: f64,
        q: f64,
        r: f64,
        mu: f64,
        f: NonlinearF,
        #[serde(default)]
        h: FieldSpec,
        /// Sobolev order of the Lipschitz estimate, in `(0, 1]`.
        #[serde(default = "default_kirchhoff_a")]
        a: f64,
        /// Quadratic defect bound of `f`; when given, `κ = γ'/(2λ₁²)`.
        #[serde(default)]
        gamma_prime: Option<f64>,
    },
    VonKarman {
        #[serde(default)]
        f0: FieldSpec,
        #[serde(default)]
        h: FieldSpec,
    },
    Berger {
        nu: f64,
        g: f64,
        #[serde(default)]
        h: FieldSpec,
    },
}

fn default_kirchhoff_a() -> f64 {
    0.5
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Zero => "zero",
            ModelSpec::Kirchhoff { .. } => "kirchhoff",
            ModelSpec::VonKarman { .. } => "von_karman",
            ModelSpec::Berger { .. } => "berger",
        }
    }

    pub fn default_kirchhoff() -> Self {
        ModelSpec::Kirchhoff {
            nu: 0.1,
            q: 2.0,
            r: 0.0,
            mu: 0.5,
            f: NonlinearF::Cubic { coef: 1.0 },
            h: FieldSpec::Zero,
            a: 0.5,
            gamma_prime: None,
        }
    }

    pub fn default_von_karman() -> Self {
        ModelSpec::VonKarman { f0: FieldSpec::Sine { amp: 0.05, mx: 1, my: 1 }, h: FieldSpec::Zero }
    }

    pub fn default_berger() -> Self {
        ModelSpec::Berger { nu: 1.0, g: 1.0, h: FieldSpec::Zero }
    }

    /// Collects every invalid parameter as `key: reason`.
    pub fn validate(&self, errs: &mut Vec<String>) {
        let bad = |errs: &mut Vec<String>, k: &str, m: String| errs.push(format!("plate.model.{k}: {m}"));
        match self {
            ModelSpec::Kirchhoff { nu, q, r, a, f, gamma_prime, .. } => {
                if !(*nu >= 0.0) {
                    bad(errs, "nu", format!("{nu} must be >= 0"));
                }
                if !(*r >= 0.0 && q > r) {
                    bad(errs, "q", format!("need q > r >= 0, got q={q}, r={r}"));
                }
                if !(*a > 0.0 && *a <= 1.0) {
                    bad(errs, "a", format!("{a} must lie in (0, 1]"));
                }
                if let NonlinearF::Cubic { coef } = f {
                    if *coef < 0.0 {
                        bad(errs, "f.coef", format!("{coef}: cubic f must be nondecreasing at infinity"));
                    }
                }
                if let Some(g) = gamma_prime {
                    if !(*g > 0.0) {
                        bad(errs, "gamma_prime", format!("{g} must be positive"));
                    }
                }
            }
            ModelSpec::Berger { nu, .. } if !(*nu >= 0.0) => bad(errs, "nu", format!("{nu} must be >= 0")),
            _ => {}
        }
    }
}

/// Structural constants of a model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub kappa: f64,
    pub c_star: f64,
    pub a: f64,
    pub eps: f64,
    /// First eigenvalue of the discrete Dirichlet Laplacian.
    pub lambda1: f64,
}

/// Lower bound of a potential: `Π(η) ≥ −θ‖Δη‖² − γ/2 ‖η‖² − c₀ − (h, η)`.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Defect {
    pub theta: f64,
    pub gamma: f64,
    pub c0: f64,
}

enum Kind {
    Zero,
    Kirchhoff(kirchhoff::Kirchhoff),
    VonKarman(von_karman::VonKarman),
    Berger(berger::Berger),
}

/// A plate model bound to a grid, with its constants.
pub struct PlateModel {
    spec: ModelSpec,
    grid: PlateGrid,
    kind: Kind,
    constants: ModelConstants,
}

/// Optional overrides of the derived constants.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub c_star: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
}

pub const DEFAULT_KAPPA: f64 = 0.25;

impl PlateModel {
    pub fn new(spec: &ModelSpec, basis: &GalerkinBasis, ov: ConstantOverrides) -> Result<Self> {
        let mut errs = Vec::new();
        spec.validate(&mut errs);
        if !errs.is_empty() {
            return Err(FsiError::Config(errs));
        }
        let grid = *basis.grid();
        let lambda1 = grid.dirichlet_lambda1();
        let (kind, h, defect, a, mut kappa) = match spec {
            ModelSpec::Zero => (Kind::Zero, None, Defect::default(), 0.0, DEFAULT_KAPPA),
            ModelSpec::Kirchhoff { nu, q, r, mu, f, h, a, gamma_prime } => {
                let h = h.sample(basis)?;
                let k = kirchhoff::Kirchhoff::new(grid, *nu, *q, *r, *mu, *f, h.clone());
                let d = k.defect();
                let kappa = match gamma_prime {
                    Some(g) => g / (2.0 * lambda1 * lambda1),
                    None => DEFAULT_KAPPA,
                };
                (Kind::Kirchhoff(k), Some(h), d, *a, kappa)
            }
            ModelSpec::VonKarman { f0, h } => {
                let h = h.sample(basis)?;
                let v = von_karman::VonKarman::new(grid, f0.sample(basis)?, h.clone())?;
                let d = v.defect();
                (Kind::VonKarman(v), Some(h), d, 0.0, DEFAULT_KAPPA)
            }
            ModelSpec::Berger { nu, g, h } => {
                let h = h.sample(basis)?;
                let b = berger::Berger::new(grid, *nu, *g, h.clone());
                let d = b.defect(lambda1);
                (Kind::Berger(b), Some(h), d, 0.0, DEFAULT_KAPPA)
            }
        };
        if let Some(k) = ov.kappa {
            kappa = k;
        }
        if !(kappa > 0.0 && kappa < 0.5) {
            return Err(FsiError::Parameter(format!("kappa = {kappa} must lie in (0, 1/2)")));
        }
        let a = ov.a.unwrap_or(a);
        if !(0.0..2.0).contains(&a) {
            return Err(FsiError::Parameter(format!("a = {a} must lie in [0, 2)")));
        }
        let eps = ov.eps.unwrap_or(match spec {
            ModelSpec::Kirchhoff { .. } => a / 2.0,
            _ => 1.0,
        });
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(FsiError::Parameter(format!("eps = {eps} must lie in (0, 2]")));
        }
        let c_star = match ov.c_star {
            Some(c) if c >= 0.0 => c,
            Some(c) => return Err(FsiError::Parameter(format!("C_star = {c} must be >= 0"))),
            None => derive_c_star(&grid, kappa, lambda1, defect, h.as_deref())?,
        };
        Ok(Self { spec: spec.clone(), grid, kind, constants: ModelConstants { kappa, c_star, a, eps, lambda1 } })
    }

    pub fn with_defaults(spec: &ModelSpec, basis: &GalerkinBasis) -> Result<Self> {
        Self::new(spec, basis, ConstantOverrides::default())
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn name(&self) -> &'static str {
        self.spec.name()
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn grid(&self) -> &PlateGrid {
        &self.grid
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    /// Nodal force `F_h(η)` on the grid.
    pub fn force_field(&self, eta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(eta)?;
        let f = match &self.kind {
            Kind::Zero => vec![0.0; eta.len()],
            Kind::Kirchhoff(k) => k.force(eta)?,
            Kind::VonKarman(v) => v.force(eta)?,
            Kind::Berger(b) => b.force(eta)?,
        };
        Ok(f)
    }

    /// `Π_h(η)`.
    pub fn potential_field(&self, eta: &[f64]) -> Result<f64> {
        self.check_len(eta)?;
        match &self.kind {
            Kind::Zero => Ok(0.0),
            Kind::Kirchhoff(k) => k.potential(eta),
            Kind::VonKarman(v) => v.potential(eta),
            Kind::Berger(b) => b.potential(eta),
        }
    }

    /// `F̄(c) = ((F(η), w_i)_h)_i` for `η = Σ c_i w_i`.
    pub fn force(&self, basis: &GalerkinBasis, c: &[f64]) -> Result<Vec<f64>> {
        if self.is_zero() {
            return Ok(vec![0.0; basis.k()]);
        }
        Ok(basis.project(&self.force_field(&basis.synthesize(c))?))
    }

    pub fn potential(&self, basis: &GalerkinBasis, c: &[f64]) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        self.potential_field(&basis.synthesize(c))
    }

    pub fn airy(&self, eta: &[f64]) -> Option<Result<AiryField>> {
        match &self.kind {
            Kind::VonKarman(v) => Some(v.airy(eta)),
            _ => None,
        }
    }

    fn check_len(&self, eta: &[f64]) -> Result<()> {
        if eta.len() != self.grid.len() {
            return Err(FsiError::Parameter(format!(
                "field of length {} on a grid of {} nodes",
                eta.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }
}

/// `C* = c₀ + ‖h‖² / (2δ)` with `δ = 2(κ − θ)λ₁² − γ`.
fn derive_c_star(grid: &PlateGrid, kappa: f64, lambda1: f64, d: Defect, h: Option<&[f64]>) -> Result<f64> {
    let delta = 2.0 * (kappa - d.theta) * lambda1 * lambda1 - d.gamma;
    let h2 = h.map_or(0.0, |h| grid.inner(h, h));
    if delta < 0.0 || (delta == 0.0 && h2 > 0.0) {
        return Err(FsiError::Parameter(format!(
            "kappa = {kappa} too small to absorb the quadratic defect \
             (theta = {:.4e}, gamma = {:.4e}, lambda1 = {lambda1:.4e})",
            d.theta, d.gamma
        )));
    }
    let hterm = if h2 > 0.0 { h2 / (2.0 * delta) } else { 0.0 };
    Ok(d.c0 + hterm)
}

pub(crate) fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FsiError::Numeric(format!("non-finite value in {what}")))
    }
}

pub(crate) fn all_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(FsiError::Numeric(format!("non-finite value in {what}")))
    }
}
