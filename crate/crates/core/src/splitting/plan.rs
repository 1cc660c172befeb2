use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};

/// Constants entering the step-count condition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanConstants {
    #[serde(rename = "C_B")]
    pub c_b: f64,
    #[serde(rename = "C_Gamma")]
    pub c_gamma: f64,
    #[serde(rename = "C_R")]
    pub c_r: f64,
    /// `‖F(0)‖` in the spectral `H^{−a}` norm.
    #[serde(rename = "F0_norm")]
    pub f0_norm: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C_star")]
    pub c_star: f64,
    pub kappa: f64,
    pub c: f64,
    #[serde(rename = "C_Pi_eta0")]
    pub c_pi_eta0: f64,
    /// Initial energy without the potential.
    #[serde(rename = "E0")]
    pub e0: f64,
    /// Radius of the H² ball on which `C_R` was sampled.
    #[serde(rename = "R")]
    pub r: f64,
}

impl PlanConstants {
    /// Fills `c = 1/2 − κ` and `C_B = C_Γ (C* + C₀)/c`.
    pub fn derive(mut self) -> Result<Self> {
        self.c = 0.5 - self.kappa;
        if !(self.c > 0.0) {
            return Err(FsiError::Parameter(format!("kappa = {} leaves c = 1/2 - kappa <= 0", self.kappa)));
        }
        self.c_b = self.c_gamma * (self.c_star + self.c0) / self.c;
        Ok(self)
    }
}

/// Step counts at or above this are rejected rather than rounded.
pub const MAX_STEPS: f64 = 9.0e15;

/// Every factor of the step-count condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NMinBreakdown {
    pub t: f64,
    pub alpha: f64,
    pub a: f64,
    pub xi_k: f64,
    pub sum_xi_a2: f64,
    /// `2 ξ_k C_B`.
    pub term_basis: f64,
    /// `4 C_R² C_Γ (‖F(0)‖² + C_B) Σ ξᵢ^{a/2}`.
    pub term_lipschitz: f64,
    pub exponent: f64,
    /// `T (term_basis + term_lipschitz)^{exponent}`.
    pub pre_ceil: f64,
    pub n_min: u64,
}

/// Smallest admissible step count `N(k)`.
pub fn compute_n_min(c: &PlanConstants, xi: &[f64], t: f64, alpha: f64, a: f64) -> Result<NMinBreakdown> {
    if !(alpha > 0.0 && alpha < 2.0) && alpha != 0.0 {
        return Err(FsiError::Parameter(format!("alpha = {alpha} must lie in (0, 2)")));
    }
    if xi.is_empty() || !(t > 0.0) {
        return Err(FsiError::Parameter(format!("need k >= 1 and T > 0 (k = {}, T = {t})", xi.len())));
    }
    let xi_k = xi[xi.len() - 1];
    let sum_xi_a2: f64 = xi.iter().map(|x| x.powf(a / 2.0)).sum();
    let term_basis = 2.0 * xi_k * c.c_b;
    let term_lipschitz = 4.0 * c.c_r * c.c_r * c.c_gamma * (c.f0_norm * c.f0_norm + c.c_b) * sum_xi_a2;
    let exponent = 1.0 / (2.0 - alpha);
    let base = term_basis + term_lipschitz;
    if !(base >= 0.0 && base.is_finite()) {
        return Err(FsiError::Numeric(format!("step-count base {base} is not a finite non-negative number")));
    }
    let pre_ceil = t * base.powf(exponent);
    if !(pre_ceil < MAX_STEPS) {
        return Err(FsiError::Numeric(format!(
            "step-count condition needs N >= {pre_ceil:.3e}, beyond any feasible run"
        )));
    }
    let n_min = (pre_ceil.ceil() as u64).max(1);
    Ok(NMinBreakdown { t, alpha, a, xi_k, sum_xi_a2, term_basis, term_lipschitz, exponent, pre_ceil, n_min })
}

/// Step schedule with `t_n = n T / N`, so that `t_N = T` exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingPlan {
    #[serde(rename = "T")]
    pub t: f64,
    pub k: usize,
    pub alpha: f64,
    pub a: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "N_min")]
    pub n_min: u64,
    pub strict: bool,
    pub dt: f64,
    pub constants: PlanConstants,
}

impl SplittingPlan {
    /// `N = max(N_user, N_min)` in strict mode, `N_user` otherwise.
    pub fn new(
        t: f64,
        k: usize,
        alpha: f64,
        a: f64,
        n_user: u64,
        n_min: u64,
        strict: bool,
        c: PlanConstants,
    ) -> Result<Self> {
        let n = if strict { n_user.max(n_min) } else { n_user };
        if n == 0 {
            return Err(FsiError::Parameter("the step count must be at least 1".into()));
        }
        Ok(Self { t, k, alpha, a, n, n_min, strict, dt: t / n as f64, constants: c })
    }

    pub fn time(&self, n: u64) -> f64 {
        if n == self.n {
            self.t
        } else {
            self.t * n as f64 / self.n as f64
        }
    }

    pub fn with_steps(&self, n: u64) -> Self {
        Self { n, dt: self.t / n as f64, ..self.clone() }
    }
}
