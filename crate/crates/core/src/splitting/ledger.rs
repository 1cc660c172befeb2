use serde::{Deserialize, Serialize};

use super::plan::SplittingPlan;

/// One row per sub-interval `[nΔt, (n+1)Δt]`; energies are taken at its end.
#[allow(non_snake_case)]
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub n: u64,
    pub t: f64,
    /// Structure energy at the end of the structure step.
    pub S: f64,
    /// Fluid-step energy at the end of the sub-interval.
    pub F: f64,
    /// Viscous dissipation of the fluid step.
    pub D: f64,
    pub mismatch_ssp: f64,
    pub mismatch_fsp: f64,
    pub J_min: f64,
    pub J_max: f64,
    pub energy_kinetic_fluid: f64,
    pub energy_elastic: f64,
    pub energy_plate_kinetic: f64,
    pub potential: f64,
    pub fsp_slack: f64,
}

pub const LEDGER_COLUMNS: [&str; 14] = [
    "n",
    "t",
    "S",
    "F",
    "D",
    "mismatch_ssp",
    "mismatch_fsp",
    "J_min",
    "J_max",
    "energy_kinetic_fluid",
    "energy_elastic",
    "energy_plate_kinetic",
    "potential",
    "fsp_slack",
];

impl LedgerRow {
    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.S,
            self.F,
            self.D,
            self.mismatch_ssp,
            self.mismatch_fsp,
            self.J_min,
            self.J_max,
            self.energy_kinetic_fluid,
            self.energy_elastic,
            self.energy_plate_kinetic,
            self.potential,
            self.fsp_slack,
        ]
    }
}

/// Quantities kept per step for the audits but not written as columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepAudit {
    /// Relative residual of the structure-step energy equality.
    pub ssp_residual: f64,
    /// `(1/2Δt)∫‖∂tη − vⁿ‖²`.
    pub ssp_mismatch_term: f64,
    /// `F` at the start of the sub-interval.
    pub f_start: f64,
    pub fsp_tolerance: f64,
    pub fsp_pass: bool,
    /// `½∫Jⁿ|uⁿ⁺¹ − uⁿ|²` and `½‖vⁿ⁺¹ − ∂̃tηⁿ⁺¹‖²`.
    pub velocity_jump: f64,
    pub trace_mismatch: f64,
    /// `max_t ‖∂̃tη − ∂tη‖²`.
    pub average_defect_sq: f64,
    /// `‖vⁿ⁺¹ − vⁿ‖²`.
    pub velocity_increment_sq: f64,
    /// `|average_rate − (1/Δt)∫∂tη|` by quadrature.
    pub average_rate_quadrature_gap: f64,
    pub solver_residual: f64,
    pub div_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    /// Energy of the initial state (potential included).
    pub f0: f64,
    pub rows: Vec<LedgerRow>,
    pub audits: Vec<StepAudit>,
}

/// Kinematic-mismatch bounds of a completed run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    /// `max_n mismatch_ssp²` against `(Δt)^α`.
    pub max_mismatch_ssp_sq: f64,
    pub bound_dt_alpha: f64,
    pub mismatch_bound_pass: bool,
    /// `max ‖∂̃tη − ∂tη‖²` and the constant `C` with that value `= C (Δt)^{2α}`.
    pub max_average_defect_sq: f64,
    pub average_defect_constant: f64,
    /// `Σ mismatch_fsp²` (trace mismatch after each fluid step) and `Σ ‖vⁿ⁺¹ − vⁿ‖²`.
    pub sum_trace_mismatch_sq: f64,
    pub sum_velocity_increment_sq: f64,
    pub increments_finite: bool,
}

pub fn mismatch_report(ledger: &EnergyLedger, plan: &SplittingPlan) -> MismatchReport {
    let max_sq = ledger.rows.iter().map(|r| r.mismatch_ssp * r.mismatch_ssp).fold(0.0, f64::max);
    let bound = plan.dt.powf(plan.alpha);
    let max_def = ledger.audits.iter().map(|a| a.average_defect_sq).fold(0.0, f64::max);
    let c5 = if max_def == 0.0 { 0.0 } else { max_def / plan.dt.powf(2.0 * plan.alpha) };
    let s1: f64 = ledger.rows.iter().map(|r| r.mismatch_fsp * r.mismatch_fsp).sum();
    let s2: f64 = ledger.audits.iter().map(|a| a.velocity_increment_sq).sum();
    MismatchReport {
        max_mismatch_ssp_sq: max_sq,
        bound_dt_alpha: bound,
        mismatch_bound_pass: max_sq <= bound,
        max_average_defect_sq: max_def,
        average_defect_constant: c5,
        sum_trace_mismatch_sq: s1,
        sum_velocity_increment_sq: s2,
        increments_finite: s1.is_finite() && s2.is_finite(),
    }
}

/// Telescoping check: the per-step drops, computed from their own terms,
/// sum to `F⁰ − F^N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Telescoping {
    pub sum_of_drops: f64,
    pub energy_drop: f64,
    pub relative_gap: f64,
}

pub fn telescoping(ledger: &EnergyLedger) -> Telescoping {
    let mut sum = 0.0;
    let mut scale = ledger.f0.abs();
    for (r, a) in ledger.rows.iter().zip(&ledger.audits) {
        // structure drop F(start) − S(end) is the mismatch term by the energy
        // equality; the fluid drop S(end) − F(end) is the audited terms plus slack
        let ssp = a.ssp_mismatch_term;
        let fsp = a.velocity_jump + a.trace_mismatch + r.D + r.fsp_slack;
        sum += ssp + fsp;
        scale = scale.max(r.F.abs()).max(r.S.abs());
    }
    let f_end = ledger.rows.last().map_or(ledger.f0, |r| r.F);
    let drop = ledger.f0 - f_end;
    let gap = (sum - drop).abs();
    Telescoping { sum_of_drops: sum, energy_drop: drop, relative_gap: if gap == 0.0 { 0.0 } else { gap / scale } }
}

/// `max_n (F_n + Σ_{i≤n} D_i)` compared with `C₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBound {
    pub max_energy_plus_dissipation: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub pass: bool,
}

pub fn uniform_bound(ledger: &EnergyLedger, c0: f64, rel_tol: f64) -> UniformBound {
    let mut acc = 0.0;
    let mut max = ledger.f0;
    for r in &ledger.rows {
        acc += r.D;
        max = max.max(r.F + acc);
    }
    UniformBound { max_energy_plus_dissipation: max, c0, pass: max <= c0 + rel_tol * c0.abs() }
}
