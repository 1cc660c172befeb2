//! Files written by a run: `ledger.csv`, `summary.json`, snapshots.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::AssumptionReport;
use crate::splitting::{
    LedgerRow, MismatchReport, NMinBreakdown, Outcome, PlanConstants, RunResult, Setup, Telescoping, UniformBound,
};

/// JSON schema of `summary.json`.
pub const SUMMARY_SCHEMA: &str = include_str!("../schemas/summary.schema.json");

/// Worst values of the run-time audits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxSlacks {
    /// Largest relative residual of the structure-step energy equality.
    pub ssp_residual: f64,
    /// Smallest fluid-step slack (negative means a violated inequality).
    pub fsp_slack: f64,
    /// Largest `−slack / tolerance`; the audit passes while this is `≤ 1`.
    pub fsp_violation_ratio: f64,
    /// `max_n (F_n + Σ D) − C₀`.
    pub uniform_bound_excess: f64,
    pub telescoping_gap: f64,
    pub max_solver_residual: f64,
    pub max_div_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub outcome: Outcome,
    pub error: Option<String>,
    pub model: String,
    #[serde(rename = "T")]
    pub t: f64,
    pub dt: f64,
    pub k: usize,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "N_min")]
    pub n_min: u64,
    #[serde(rename = "N_min_C_R_doubled")]
    pub n_min_c_r_doubled: u64,
    pub strict: bool,
    pub alpha: f64,
    pub steps_completed: u64,
    pub constants: PlanConstants,
    pub n_min_breakdown: NMinBreakdown,
    pub max_slacks: MaxSlacks,
    pub all_fsp_audits_pass: bool,
    pub mismatch: MismatchReport,
    pub telescoping: Telescoping,
    pub uniform_bound: UniformBound,
    pub assumptions: AssumptionReport,
    pub initial_removed_flux: f64,
    pub final_j_min: f64,
}

impl Summary {
    pub fn new(setup: &Setup, r: &RunResult) -> Self {
        let a = &r.ledger.audits;
        let fold_max = |f: &dyn Fn(&crate::splitting::StepAudit) -> f64| a.iter().map(f).fold(0.0, f64::max);
        let slack = if r.ledger.rows.is_empty() { 0.0 } else { r.min_fsp_slack() };
        Self {
            outcome: r.outcome.clone(),
            error: r.error.clone(),
            model: setup.model.name().into(),
            t: r.plan.t,
            dt: r.plan.dt,
            k: r.plan.k,
            n: r.plan.n,
            n_min: r.plan.n_min,
            n_min_c_r_doubled: setup.n_min_c_r_doubled,
            strict: r.plan.strict,
            alpha: r.plan.alpha,
            steps_completed: r.snapshots.len() as u64 - 1,
            constants: r.plan.constants,
            n_min_breakdown: setup.n_min.clone(),
            max_slacks: MaxSlacks {
                ssp_residual: r.max_ssp_residual(),
                fsp_slack: slack,
                fsp_violation_ratio: a
                    .iter()
                    .zip(&r.ledger.rows)
                    .filter(|(a, _)| a.fsp_tolerance > 0.0)
                    .map(|(a, row)| -row.fsp_slack / a.fsp_tolerance)
                    .reduce(f64::max)
                    .unwrap_or(0.0),
                uniform_bound_excess: r.uniform.max_energy_plus_dissipation - r.uniform.c0,
                telescoping_gap: r.telescoping.relative_gap,
                max_solver_residual: fold_max(&|a| a.solver_residual),
                max_div_residual: fold_max(&|a| a.div_residual),
            },
            all_fsp_audits_pass: r.all_fsp_pass(),
            mismatch: r.mismatch.clone(),
            telescoping: r.telescoping,
            uniform_bound: r.uniform,
            assumptions: setup.assumptions.clone(),
            initial_removed_flux: setup.initial.removed_flux,
            final_j_min: r.ledger.rows.last().map_or(setup.initial.j_min, |row| row.J_min),
        }
    }
}

/// RFC 4180 CSV with a header row of the ledger field names.
pub fn write_ledger_csv<W: Write>(w: W, rows: &[LedgerRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wr.write_record(crate::splitting::LEDGER_COLUMNS)?;
    }
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_ledger_csv<R: std::io::Read>(r: R) -> Result<Vec<LedgerRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rd.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// Writes every requested output of a run into `dir`.
pub fn write_run(dir: &Path, setup: &Setup, r: &RunResult) -> Result<Summary> {
    use crate::config::OutputFormat::*;
    std::fs::create_dir_all(dir)?;
    let cfg = &setup.config;
    if cfg.wants(Csv) {
        write_ledger_csv(std::fs::File::create(dir.join("ledger.csv"))?, &r.ledger.rows)?;
    }
    let summary = Summary::new(setup, r);
    if cfg.wants(Json) {
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    }
    if cfg.wants(Snapshots) {
        let mut wr = csv::Writer::from_path(dir.join("snapshots.csv"))?;
        let k = r.plan.k;
        let mut head = vec!["n".to_string(), "t".to_string()];
        head.extend((1..=k).map(|i| format!("alpha_{i}")));
        head.extend((1..=k).map(|i| format!("beta_{i}")));
        wr.write_record(&head)?;
        for s in &r.snapshots {
            let mut rec = vec![s.n.to_string(), s.t.to_string()];
            rec.extend(s.alpha.iter().chain(&s.beta).map(|v| v.to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
    }
    if cfg.wants(VelocitySlice) {
        let g = &setup.ctx.grid;
        let (nxc, nyc, nzc) = g.cells();
        let j = nyc / 2;
        let u = &r.final_state.u;
        let mut wr = csv::Writer::from_path(dir.join("velocity_slice.csv"))?;
        wr.write_record(["i", "k", "x", "y", "z", "u1", "u2", "u3"])?;
        for k in 0..nzc {
            for i in 0..nxc {
                let c = g.cell_center(i, j, k);
                let v: Vec<f64> = (0..3).map(|m| u.cell_avg(g, m, i, j, k)).collect();
                wr.write_record(&[
                    i.to_string(),
                    k.to_string(),
                    c[0].to_string(),
                    c[1].to_string(),
                    c[2].to_string(),
                    v[0].to_string(),
                    v[1].to_string(),
                    v[2].to_string(),
                ])?;
            }
        }
        wr.flush()?;
    }
    Ok(summary)
}

pub fn write_converge_csv<W: Write>(w: W, rows: &[crate::harness::ConvergeRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
