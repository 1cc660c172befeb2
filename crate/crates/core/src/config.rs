//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::models::{ConstantOverrides, FieldSpec, ModelSpec};

/// The only environment variable read: it replaces `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    #[serde(rename = "Lx", default = "one")]
    pub lx: f64,
    #[serde(rename = "Ly", default = "one")]
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    /// Fluid viscosity.
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateConfig {
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(rename = "C_star", default, skip_serializing_if = "Option::is_none")]
    pub c_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Exponent of the kinematic-mismatch bound `(Δt)^α`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl PlateConfig {
    pub fn overrides(&self) -> ConstantOverrides {
        ConstantOverrides { kappa: self.kappa, c_star: self.c_star, a: self.a, eps: self.eps }
    }
}

/// Initial fluid velocity on the physical domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocitySpec {
    #[default]
    Zero,
    /// Horizontal divergence-free vortex `amp (z+1) (∂yψ, −∂xψ, 0)` with
    /// `ψ = sin²(πx/Lx) sin²(πy/Ly)`.
    Vortex { amp: f64 },
}

impl VelocitySpec {
    pub fn eval(&self, lx: f64, ly: f64, p: [f64; 3]) -> [f64; 3] {
        use std::f64::consts::PI;
        match self {
            VelocitySpec::Zero => [0.0; 3],
            VelocitySpec::Vortex { amp } => {
                let (sx, sy) = ((PI * p[0] / lx).sin(), (PI * p[1] / ly).sin());
                let (s2x, s2y) = ((2.0 * PI * p[0] / lx).sin(), (2.0 * PI * p[1] / ly).sin());
                let g = amp * (p[2] + 1.0).max(0.0);
                [g * sx * sx * s2y * PI / ly, -g * s2x * sy * sy * PI / lx, 0.0]
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Initial {
    #[serde(default)]
    pub eta0: FieldSpec,
    #[serde(default)]
    pub v0: FieldSpec,
    #[serde(default)]
    pub u0: VelocitySpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "T")]
    pub t: f64,
    pub k: usize,
    #[serde(rename = "N_user", default = "one_u64")]
    pub n_user: u64,
    #[serde(default = "yes")]
    pub strict: bool,
    #[serde(default = "default_j_floor")]
    pub j_floor: f64,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo samples for the model constants.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "default_tol_energy")]
    pub tol_energy: f64,
    #[serde(default = "default_tol_ode")]
    pub tol_ode: f64,
    #[serde(default = "default_tol_solver")]
    pub tol_solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_energy: default_tol_energy(), tol_ode: default_tol_ode(), tol_solver: default_tol_solver() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// `ledger.csv`
    Csv,
    /// `summary.json`
    Json,
    /// `snapshots.csv`: plate coefficients after every step.
    Snapshots,
    /// `velocity_slice.csv`: final velocity on the mid-`y` plane.
    VelocitySlice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), formats: default_formats() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DebugConfig {
    #[serde(default)]
    pub corrupt_convection_sign: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub geometry: Geometry,
    pub physics: Physics,
    pub plate: PlateConfig,
    #[serde(default)]
    pub initial: Initial,
    pub run: RunConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub debug: DebugConfig,
}

fn one() -> f64 {
    1.0
}
fn one_u64() -> u64 {
    1
}
fn yes() -> bool {
    true
}
fn default_alpha() -> f64 {
    0.5
}
fn default_j_floor() -> f64 {
    crate::ale::DEFAULT_J_FLOOR
}
fn default_samples() -> usize {
    400
}
fn default_tol_energy() -> f64 {
    1e-6
}
fn default_tol_ode() -> f64 {
    1e-10
}
fn default_tol_solver() -> f64 {
    1e-10
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Snapshots]
}

impl SimConfig {
    /// Parses and validates. Unknown keys and invalid values are all
    /// reported together.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let mut errs = Vec::new();
        let cfg: Option<SimConfig> = match serde_path_to_error::deserialize(&raw) {
            Ok(c) => Some(c),
            Err(e) => {
                errs.push(format!("{}: {}", e.path(), e.inner()));
                None
            }
        };
        if let Some(c) = &cfg {
            let known = serde_json::to_value(c)?;
            unknown_keys(&raw, &known, "", &mut errs);
            c.validate_into(&mut errs);
        }
        match cfg {
            Some(c) if errs.is_empty() => Ok(c),
            _ => Err(FsiError::Config(errs)),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FsiError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        self.validate_into(&mut errs);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(FsiError::Config(errs))
        }
    }

    fn validate_into(&self, errs: &mut Vec<String>) {
        let mut bad = |k: &str, m: String| errs.push(format!("{k}: {m}"));
        let g = &self.geometry;
        for (k, v) in [("geometry.Lx", g.lx), ("geometry.Ly", g.ly)] {
            if !(v > 0.0 && v.is_finite()) {
                bad(k, format!("{v} must be positive"));
            }
        }
        for (k, v, min) in [("geometry.nx", g.nx, 4), ("geometry.ny", g.ny, 4), ("geometry.nz", g.nz, 4)] {
            if v < min {
                bad(k, format!("{v} must be >= {min}"));
            }
        }
        if !(self.physics.mu >= 0.0 && self.physics.mu.is_finite()) {
            bad("physics.mu", format!("{} must be >= 0", self.physics.mu));
        }
        let p = &self.plate;
        if !(p.alpha > 0.0 && p.alpha < 2.0) {
            bad("plate.alpha", format!("{} must lie in (0, 2)", p.alpha));
        }
        if let Some(k) = p.kappa {
            if !(k > 0.0 && k < 0.5) {
                bad("plate.kappa", format!("{k} must lie in (0, 1/2)"));
            }
        }
        if let Some(c) = p.c_star {
            if !(c >= 0.0) {
                bad("plate.C_star", format!("{c} must be >= 0"));
            }
        }
        if let Some(a) = p.a {
            if !(0.0..2.0).contains(&a) {
                bad("plate.a", format!("{a} must lie in [0, 2)"));
            }
        }
        if let Some(e) = p.eps {
            if !(e > 0.0 && e <= 2.0) {
                bad("plate.eps", format!("{e} must lie in (0, 2]"));
            }
        }
        let r = &self.run;
        if !(r.t > 0.0 && r.t.is_finite()) {
            bad("run.T", format!("{} must be positive", r.t));
        }
        if r.k == 0 {
            bad("run.k", "must be >= 1".into());
        } else if r.k > g.nx * g.ny {
            bad("run.k", format!("{} exceeds the {} plate unknowns", r.k, g.nx * g.ny));
        }
        if r.n_user == 0 {
            bad("run.N_user", "must be >= 1".into());
        }
        if !(r.j_floor >= 0.0 && r.j_floor < 1.0) {
            bad("run.j_floor", format!("{} must lie in [0, 1)", r.j_floor));
        }
        if r.samples < 100 {
            bad("run.samples", format!("{} must be >= 100", r.samples));
        }
        let t = &self.tolerances;
        for (k, v) in [
            ("tolerances.tol_energy", t.tol_energy),
            ("tolerances.tol_ode", t.tol_ode),
            ("tolerances.tol_solver", t.tol_solver),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad(k, format!("{v} must be positive"));
            }
        }
        for (k, f) in [("initial.eta0", &self.initial.eta0), ("initial.v0", &self.initial.v0)] {
            if let FieldSpec::Modes { coeffs } = f {
                if coeffs.len() > r.k {
                    bad(k, format!("{} coefficients for k = {}", coeffs.len(), r.k));
                }
            }
        }
        self.plate.model.validate(errs);
    }

    /// Output directory: `cli` if given, else `$OUTPUT_DIR`, else `output.dir`.
    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        if let Some(p) = cli {
            return p.to_path_buf();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output.dir.clone(),
        }
    }

    pub fn wants(&self, f: OutputFormat) -> bool {
        self.output.formats.contains(&f)
    }
}

/// Keys of `raw` that did not survive the round trip through the typed
/// config. Explicit nulls stand for absent optional values.
fn unknown_keys(raw: &serde_json::Value, known: &serde_json::Value, path: &str, errs: &mut Vec<String>) {
    use serde_json::Value;
    if let (Value::Object(r), Value::Object(k)) = (raw, known) {
        for (key, v) in r {
            let p = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
            match k.get(key) {
                Some(kv) => unknown_keys(v, kv, &p, errs),
                None if v.is_null() => {}
                None => errs.push(format!("{p}: unknown key")),
            }
        }
    }
}
