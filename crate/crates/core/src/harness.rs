//! Verification suites, refinement study and eigenvalue report behind the
//! `verify`, `converge` and `eigs` commands.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ale::{geometric_identity_check, ReferenceGrid, StaggeredField};
use crate::config::SimConfig;
use crate::error::{FsiError, Result};
use crate::exec::{self, ExecMode};
use crate::fluid::{assemble_fsp, solve_fsp, FluidState, FspContext, FspInputs, FspOptions};
use crate::models::{ModelSpec, PlateModel, Sampler};
use crate::plate::{GalerkinBasis, PlateGrid};
use crate::splitting::{compute_n_min, run, ssp_step, NMinBreakdown, Outcome, RunOptions, RunResult, Setup};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

impl SuiteResult {
    fn new(name: &str, pass: bool, detail: String, metrics: &[(&str, f64)]) -> Self {
        Self { name: name.into(), pass, detail, metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }

    fn failed(name: &str, e: &FsiError) -> Self {
        Self::new(name, false, format!("error: {e}"), &[])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

/// Central-difference check of `Π′ = F` along `ψ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub eps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log ε`.
    pub slope: f64,
}

/// `|(Π(η+εψ) − Π(η−εψ))/2ε − (F(η), ψ)|` for each `ε`, in coefficients.
pub fn gradient_consistency(
    model: &PlateModel,
    basis: &GalerkinBasis,
    eta: &[f64],
    psi: &[f64],
    eps: &[f64],
) -> Result<GradientCheck> {
    let f = model.force(basis, eta)?;
    let exact: f64 = f.iter().zip(psi).map(|(a, b)| a * b).sum();
    let mut errors = Vec::with_capacity(eps.len());
    for &e in eps {
        let p: Vec<f64> = eta.iter().zip(psi).map(|(a, b)| a + e * b).collect();
        let m: Vec<f64> = eta.iter().zip(psi).map(|(a, b)| a - e * b).collect();
        let fd = (model.potential(basis, &p)? - model.potential(basis, &m)?) / (2.0 * e);
        errors.push((fd - exact).abs());
    }
    Ok(GradientCheck { eps: eps.to_vec(), slope: loglog_slope(eps, &errors), errors })
}

/// Least-squares slope of `log y` against `log x`; NaN when any `y` is 0.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Point and direction for the gradient check. The direction is large so
/// the second-order truncation error dominates rounding down to `ε = 1e-5`.
pub fn gradient_probe(k: usize) -> (Vec<f64>, Vec<f64>) {
    let eta = (0..k).map(|i| 0.6 / (i as f64 + 1.0) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let psi = (0..k).map(|i| 80.0 / (i as f64 + 1.0).sqrt() * if i % 3 == 1 { -1.0 } else { 1.0 }).collect();
    (eta, psi)
}

pub const GRADIENT_EPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

fn suite<F: FnOnce() -> Result<SuiteResult>>(name: &str, f: F) -> SuiteResult {
    f().unwrap_or_else(|e| SuiteResult::failed(name, &e))
}

/// Basis: `ξᵢ = ‖Δ_h wᵢ‖²/‖wᵢ‖²` to `1e-8` relative.
pub fn suite_rayleigh(basis: &GalerkinBasis) -> SuiteResult {
    let worst =
        (0..basis.k()).map(|i| (basis.rayleigh_quotient(i) - basis.xi()[i]).abs() / basis.xi()[i]).fold(0.0, f64::max);
    SuiteResult::new(
        "basis_rayleigh",
        worst <= 1e-8,
        format!("max relative Rayleigh defect {worst:.3e} (tol 1e-8)"),
        &[("max_rel_defect", worst)],
    )
}

/// Geometric conservation on the configured grid and one refinement.
pub fn suite_geometric_identity(cfg: &SimConfig) -> SuiteResult {
    suite("geometric_identity", || {
        let g = &cfg.geometry;
        let mut metrics = Vec::new();
        let mut pass = true;
        for (lvl, r) in [(0usize, 1usize), (1, 2)] {
            let plate = PlateGrid::new(g.lx, g.ly, g.nx * r, g.ny * r)?;
            let grid = ReferenceGrid::new(plate, g.nz * r)?;
            let eta = plate.sample(|x, y| 0.2 * (std::f64::consts::PI * x / g.lx).sin().powi(2) * (3.0 * y).sin());
            let eta_t = plate.sample(|x, y| (x * (g.lx - x) * y * (g.ly - y)).sqrt() - 0.1);
            let d = geometric_identity_check(&grid, &eta_t, &eta)?;
            pass &= d <= 1e-12;
            metrics.push((if lvl == 0 { "defect_grid" } else { "defect_refined" }, d));
        }
        Ok(SuiteResult::new("geometric_identity", pass, format!("defects {metrics:?} (tol 1e-12)"), &metrics))
    })
}

/// Model: central differences of `Π` converge to `(F, ψ)` at order 2.
pub fn suite_gradient(model: &PlateModel, basis: &GalerkinBasis) -> SuiteResult {
    suite("model_gradient", || {
        let (eta, psi) = gradient_probe(basis.k());
        let g = gradient_consistency(model, basis, &eta, &psi, &GRADIENT_EPS)?;
        let exact_zero = g.errors.iter().all(|e| *e <= 1e-12);
        let pass = exact_zero || (g.slope - 2.0).abs() <= 0.2;
        Ok(SuiteResult::new(
            "model_gradient",
            pass,
            format!("errors {:?}, slope {:.3} (want 2.0 +- 0.2, or exact)", g.errors, g.slope),
            &[
                ("slope", if exact_zero { 2.0 } else { g.slope }),
                ("max_error", g.errors.iter().cloned().fold(0.0, f64::max)),
            ],
        ))
    })
}

pub fn suite_coercivity(model: &PlateModel, basis: &GalerkinBasis, seed: u64, radius: f64) -> SuiteResult {
    suite("coercivity", || {
        let r = Sampler::new(model, basis, seed).check_coercivity(radius, 1000)?;
        Ok(SuiteResult::new(
            "coercivity",
            r.pass,
            format!(
                "min of kappa|Lap eta|^2 + Pi + C* over 1000 samples in the H2 ball of radius {radius:.3e}: {:.3e}",
                r.min_margin
            ),
            &[("min_margin", r.min_margin)],
        ))
    })
}

/// Structure step with the zero model against the decoupled closed forms.
pub fn suite_ssp_closed_form(basis: &GalerkinBasis, tol: f64) -> SuiteResult {
    suite("ssp_closed_form", || {
        let zero = PlateModel::with_defaults(&ModelSpec::Zero, basis)?;
        let k = basis.k();
        let xi = basis.xi();
        let dt = 1e-3;
        let a0: Vec<f64> = (0..k).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let v: Vec<f64> = (0..k).map(|i| 0.5 - i as f64 * 0.1).collect();
        let free = ssp_step(basis, &zero, &a0, &vec![0.0; k], 0.0, dt, tol)?;
        let forced = ssp_step(basis, &zero, &vec![0.0; k], &v, 0.0, dt, tol)?;
        let mut worst = 0.0f64;
        for p in free.gauss.iter().chain(std::iter::once(&free.end)) {
            for i in 0..k {
                worst = worst.max((p.alpha[i] - (-dt * xi[i] * p.tau).exp() * a0[i]).abs());
            }
        }
        for p in forced.gauss.iter().chain(std::iter::once(&forced.end)) {
            for i in 0..k {
                let c = v[i] / (dt * xi[i]) * (1.0 - (-dt * xi[i] * p.tau).exp());
                worst = worst.max((p.alpha[i] - c).abs());
            }
        }
        let avg = free.average_rate();
        let avg_gap =
            (0..k).map(|i| (avg[i] - ((-dt * xi[i] * dt).exp() - 1.0) / dt * a0[i]).abs()).fold(0.0, f64::max);
        let q = free.quadrature_average_rate();
        let quad_gap = avg.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let pass = worst <= 1e-9 && avg_gap <= 1e-9 && quad_gap <= 1e-8;
        Ok(SuiteResult::new(
            "ssp_closed_form",
            pass,
            format!("trajectory error {worst:.3e}, average rate error {avg_gap:.3e}, quadrature gap {quad_gap:.3e}"),
            &[("trajectory_error", worst), ("average_rate_error", avg_gap), ("quadrature_gap", quad_gap)],
        ))
    })
}

/// Fluid step: zero data gives zero, convection is exactly skew.
pub fn suite_fsp(basis: &GalerkinBasis, ctx: &FspContext, mu: f64, opts: FspOptions) -> SuiteResult {
    suite("fsp_skew_zero", || {
        let k = basis.k();
        let zero = vec![0.0; k];
        let u0 = StaggeredField::zeros(&ctx.grid);
        let inp =
            FspInputs { u_prev: &u0, eta_prev: &zero, eta_next: &zero, dteta_avg: &zero, dt: 1e-2, mu, j_floor: 1e-3 };
        let sys = assemble_fsp(ctx, basis, &inp, opts)?;
        let sol = solve_fsp(ctx, &sys, 1e-10)?;
        let zero_ok = sol.state == FluidState::zeros(ctx);

        let g = &ctx.grid;
        let mut u = StaggeredField::sample(g, |[x, y, z]| {
            [(3.0 * x + y).sin() * (z + 1.0), (2.0 * y - x).cos() * z * (z + 1.0), 0.3 * (x * y).sin() * (z + 1.0)]
        });
        for (f, kind) in ctx.kinds.iter().enumerate() {
            if *kind == crate::fluid::FaceKind::Fixed {
                u.data[f] = 0.0;
            }
        }
        let ep: Vec<f64> = (0..k).map(|i| 0.03 / (i as f64 + 1.0)).collect();
        let en: Vec<f64> = (0..k).map(|i| 0.035 / (i as f64 + 1.0)).collect();
        let rt: Vec<f64> = (0..k).map(|i| 0.5 - 0.2 * i as f64).collect();
        let inp = FspInputs { u_prev: &u, eta_prev: &ep, eta_next: &en, dteta_avg: &rt, dt: 1e-2, mu, j_floor: 1e-3 };
        let sys = assemble_fsp(ctx, basis, &inp, opts)?;
        let skew = sys.convection_skew_defect();
        let pass = zero_ok && skew <= 1e-12;
        Ok(SuiteResult::new(
            "fsp_skew_zero",
            pass,
            format!("zero data -> zero solution: {zero_ok}; max |sym(convection)| = {skew:.3e} (tol 1e-12)"),
            &[("skew_defect", skew), ("zero_solution", if zero_ok { 1.0 } else { 0.0 })],
        ))
    })
}

/// Audits of a strict run.
pub fn suite_run(r: &RunResult, tol_energy: f64) -> SuiteResult {
    let ssp = r.max_ssp_residual();
    let fsp = r.all_fsp_pass();
    let bound_ok = r.mismatch.mismatch_bound_pass;
    let uni = r.uniform.pass;
    let tele = r.telescoping.relative_gap;
    let done = r.outcome == Outcome::Completed;
    let pass = done && ssp <= tol_energy && fsp && bound_ok && uni && tele <= 1e-8;
    SuiteResult::new(
        "strict_run",
        pass,
        format!(
            "outcome {:?}{}; ssp residual {ssp:.3e} (tol {tol_energy:.1e}); fsp audits pass: {fsp}; \
             min fsp slack {:.3e}; max mismatch^2 {:.3e} <= dt^alpha {:.3e}: {bound_ok}; uniform bound: {uni}; telescoping gap {tele:.3e}",
            r.outcome,
            r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default(),
            r.min_fsp_slack(),
            r.mismatch.max_mismatch_ssp_sq,
            r.mismatch.bound_dt_alpha,
        ),
        &[
            ("ssp_residual", ssp),
            ("min_fsp_slack", r.min_fsp_slack()),
            ("max_mismatch_ssp_sq", r.mismatch.max_mismatch_ssp_sq),
            ("telescoping_gap", tele),
            ("steps", r.ledger.rows.len() as f64),
        ],
    )
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub mode: ExecMode,
    pub dump_dir: Option<PathBuf>,
}

/// Runs every suite in order. Setup failures are reported as a failing
/// suite rather than an error.
pub fn verify(cfg: &SimConfig, opts: &VerifyOptions) -> Result<VerifyReport> {
    cfg.validate()?;
    let setup = Setup::new(cfg, opts.mode)?;
    let (basis, model, ctx) = (&setup.basis, &setup.model, &setup.ctx);
    let fopts = FspOptions { corrupt_convection_sign: cfg.debug.corrupt_convection_sign };
    let mut suites = vec![
        suite_rayleigh(basis),
        suite_geometric_identity(cfg),
        suite_gradient(model, basis),
        suite_coercivity(model, basis, cfg.run.seed, setup.plan.constants.r.max(1.0)),
        suite_ssp_closed_form(basis, cfg.tolerances.tol_ode),
        suite_fsp(basis, ctx, cfg.physics.mu, fopts),
    ];
    let r = run(&setup, &RunOptions { dump_dir: opts.dump_dir.clone(), mode: opts.mode, ..Default::default() })?;
    suites.push(suite_run(&r, cfg.tolerances.tol_energy));
    let pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport { suites, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRow {
    pub level: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub dt: f64,
    /// `max_n ‖η_level(t_n) − η_finest(t_n)‖` over the level's step times.
    pub eta_diff: f64,
    /// `‖u_level − u_finest‖` in `L²(0,T; L²)` with the reference-box mass.
    pub u_diff: f64,
    /// Whether both differences decreased from the previous level.
    pub monotone: bool,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergeReport {
    pub model: String,
    pub k: usize,
    pub rows: Vec<ConvergeRow>,
    pub pass: bool,
}

fn decreased(prev: f64, cur: f64) -> bool {
    cur < prev || (prev <= 1e-14 && cur <= prev)
}

/// Refinement study over `levels` step counts `N₀ 2^ℓ` with `N₀` the
/// planned step count. Levels run in parallel, each with its own state.
pub fn converge(cfg: &SimConfig, levels: usize, mode: ExecMode) -> Result<ConvergeReport> {
    if levels < 3 {
        return Err(FsiError::Parameter(format!("converge needs at least 3 levels, got {levels}")));
    }
    let setup = Setup::new(cfg, mode)?;
    let n0 = setup.plan.n;
    let results: Vec<Result<RunResult>> = exec::map_range(mode, levels, |l| {
        run(&setup, &RunOptions { n_override: Some(n0 << l), keep_velocity: true, mode, ..Default::default() })
    });
    let results: Vec<RunResult> = results.into_iter().collect::<Result<_>>()?;
    let fine = &results[levels - 1];
    let mass0 = setup.ctx.mass_diagonal(&vec![0.0; setup.basis.grid().len()]);
    let mut rows = Vec::new();
    for (l, r) in results.iter().enumerate() {
        let ratio = 1usize << (levels - 1 - l);
        let complete = r.outcome == Outcome::Completed && fine.outcome == Outcome::Completed;
        let (mut de, mut du) = (f64::NAN, f64::NAN);
        if complete {
            de = r
                .snapshots
                .iter()
                .map(|s| {
                    let f = &fine.snapshots[s.n as usize * ratio];
                    s.alpha.iter().zip(&f.alpha).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max);
            let dtf = fine.plan.dt;
            let mut acc = 0.0;
            for (m, uf) in fine.velocities.iter().enumerate() {
                let ul = &r.velocities[m / ratio];
                acc += dtf
                    * ul.data.iter().zip(&uf.data).zip(&mass0).map(|((a, b), w)| w * (a - b) * (a - b)).sum::<f64>();
            }
            du = acc.sqrt();
        }
        let monotone = match rows.last() {
            None => complete,
            Some(p @ ConvergeRow { .. }) => complete && decreased(p.eta_diff, de) && decreased(p.u_diff, du),
        };
        rows.push(ConvergeRow {
            level: l,
            n: r.plan.n,
            dt: r.plan.dt,
            eta_diff: de,
            u_diff: du,
            monotone,
            outcome: r.outcome.clone(),
        });
    }
    let pass = rows.iter().all(|r| r.monotone);
    Ok(ConvergeReport { model: setup.model.name().into(), k: setup.plan.k, rows, pass })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigsReport {
    pub xi: Vec<f64>,
    pub rayleigh: Vec<f64>,
    pub breakdown: NMinBreakdown,
    pub n_min_c_r_doubled: u64,
}

pub fn eigs(cfg: &SimConfig, mode: ExecMode) -> Result<EigsReport> {
    let setup = Setup::new(cfg, mode)?;
    let b = &setup.basis;
    let again = compute_n_min(&setup.plan.constants, b.xi(), cfg.run.t, cfg.plate.alpha, setup.plan.a)?;
    debug_assert_eq!(again, setup.n_min);
    Ok(EigsReport {
        xi: b.xi().to_vec(),
        rayleigh: (0..b.k()).map(|i| b.rayleigh_quotient(i)).collect(),
        breakdown: again,
        n_min_c_r_doubled: setup.n_min_c_r_doubled,
    })
}
