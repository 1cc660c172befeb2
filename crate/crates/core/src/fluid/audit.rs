use serde::{Deserialize, Serialize};

use super::fsp::{FluidState, FspSystem};

/// Terms of the fluid-step energy inequality
/// `Eⁿ⁺¹ + ½∫Jⁿ|u−uⁿ|² + ½|β−β̃|² + Dⁿ⁺¹ ≤ Sⁿ⁺¹((n+1)Δt)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FspAudit {
    /// `½∫Jⁿ⁺¹|u|²`.
    pub kinetic_fluid: f64,
    /// `½|β|²`.
    pub kinetic_plate: f64,
    /// `½∫Jⁿ|u − uⁿ|²`.
    pub velocity_jump: f64,
    /// `½|β − β̃|²`.
    pub trace_mismatch: f64,
    /// `Δt μ ∫Jⁿ D:D`.
    pub dissipation: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates every term with the same quadrature as the assembly.
/// `plate_energy` is `½‖Δη‖² + Π(η)` at the end of the step; `s_end` is the
/// structure energy at the end of the step.
pub fn fsp_energy_audit(sys: &FspSystem, out: &FluidState, s_end: f64, plate_energy: f64) -> FspAudit {
    let u = &out.u.data;
    let kinetic_fluid = 0.5 * u.iter().zip(&sys.mass_next).map(|(a, m)| m * a * a).sum::<f64>();
    let kinetic_plate = 0.5 * out.beta.iter().map(|b| b * b).sum::<f64>();
    let velocity_jump =
        0.5 * u.iter().zip(&sys.u_prev.data).zip(&sys.mass_prev).map(|((a, b), m)| m * (a - b) * (a - b)).sum::<f64>();
    let trace_mismatch = 0.5 * out.beta.iter().zip(&sys.beta_tilde).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let dissipation = 0.5 * sys.dt * sys.viscous.quad(u, u);
    let lhs = kinetic_fluid + kinetic_plate + plate_energy + velocity_jump + trace_mismatch + dissipation;
    let slack = s_end - lhs;
    let tolerance = 1e-9 * s_end.abs().max(1.0);
    FspAudit {
        kinetic_fluid,
        kinetic_plate,
        velocity_jump,
        trace_mismatch,
        dissipation,
        lhs,
        rhs: s_end,
        slack,
        tolerance,
        pass: slack >= -tolerance,
    }
}
