use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error)]
pub enum FsiError {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("eigensolver did not converge for eigenpair {index}: {detail}")]
    Eigensolver { index: usize, detail: String },

    #[error("linear solve failed: {detail} (relative residual {residual:.3e})")]
    Solver { detail: String, residual: f64 },

    #[error("solution accuracy {residual:.3e} above tolerance {tolerance:.3e}")]
    Accuracy { residual: f64, tolerance: f64 },

    #[error("non-finite value in {0}")]
    Numeric(String),

    #[error("geometry error: Jacobian minimum {j_min:.6} at or below floor {j_floor:.6}")]
    Geometry { j_min: f64, j_floor: f64 },

    #[error("incompatible boundary data: net flux mismatch {mismatch:.3e}")]
    Compatibility { mismatch: f64 },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("ODE integration failed on [{t0:.6e}, {t1:.6e}]: {detail}; try a smaller time step or basis size")]
    Integrator { t0: f64, t1: f64, detail: String },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<FsiError>,
    },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FsiError>;
