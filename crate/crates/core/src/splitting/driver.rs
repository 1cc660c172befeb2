use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ledger::{
    mismatch_report, telescoping, uniform_bound, EnergyLedger, LedgerRow, MismatchReport, StepAudit, Telescoping,
    UniformBound,
};
use super::plan::{compute_n_min, NMinBreakdown, PlanConstants, SplittingPlan};
use super::ssp::{elastic_energy, ssp_energy, ssp_step};
use crate::ale::{le_map, PlateSampler, ReferenceGrid, StaggeredField};
use crate::config::SimConfig;
use crate::error::{FsiError, Result};
use crate::exec::ExecMode;
use crate::fluid::{
    assemble_fsp, fsp_energy_audit, lift_top_values, solve_fsp, FaceKind, FluidState, FspContext, FspInputs, FspOptions,
};
use crate::models::{AssumptionReport, PlateModel, Sampler};
use crate::plate::{GalerkinBasis, PlateGrid};

/// How a run ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    /// The plate came within the Jacobian floor of the bottom.
    TouchedBottom,
    Error,
}

/// Everything built once per configuration.
pub struct Setup {
    pub config: SimConfig,
    pub basis: GalerkinBasis,
    pub model: PlateModel,
    pub ctx: FspContext,
    pub initial: InitialState,
    pub plan: SplittingPlan,
    pub n_min: NMinBreakdown,
    /// `N_min` with `C_R` doubled: how sensitive the step count is to the
    /// sampled Lipschitz constant.
    pub n_min_c_r_doubled: u64,
    pub assumptions: AssumptionReport,
}

/// Discrete initial data.
#[derive(Clone, Debug)]
pub struct InitialState {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Mapped and trace-corrected velocity.
    pub u: StaggeredField,
    /// Net interface flux of the trace correction removed by the lift.
    pub removed_flux: f64,
    pub j_min: f64,
    pub j_max: f64,
}

/// Extra switches that are not part of the configuration.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the configured step count (strict mode still applies).
    pub n_override: Option<u64>,
    /// Write the first fluid system as Matrix Market files here.
    pub dump_dir: Option<PathBuf>,
    /// Keep the velocity after every step (for refinement studies).
    pub keep_velocity: bool,
    pub mode: ExecMode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub n: u64,
    pub t: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

pub struct RunResult {
    pub outcome: Outcome,
    /// Failure message when `outcome` is `Error`.
    pub error: Option<String>,
    pub plan: SplittingPlan,
    pub ledger: EnergyLedger,
    /// Initial state first, then one per completed step.
    pub snapshots: Vec<Snapshot>,
    pub velocities: Vec<StaggeredField>,
    pub final_state: FluidState,
    pub mismatch: MismatchReport,
    pub telescoping: Telescoping,
    pub uniform: UniformBound,
}

impl RunResult {
    pub fn max_ssp_residual(&self) -> f64 {
        self.ledger.audits.iter().map(|a| a.ssp_residual).fold(0.0, f64::max)
    }

    /// Smallest FSP slack over the run (the worst case).
    pub fn min_fsp_slack(&self) -> f64 {
        self.ledger.rows.iter().map(|r| r.fsp_slack).fold(f64::INFINITY, f64::min)
    }

    pub fn all_fsp_pass(&self) -> bool {
        self.ledger.audits.iter().all(|a| a.fsp_pass)
    }
}

enum StepResult {
    Advanced {
        row: LedgerRow,
        audit: StepAudit,
        alpha: Vec<f64>,
        state: FluidState,
        mass: Vec<f64>,
    },
    /// The structure step ended with the Jacobian at or below the floor;
    /// the row carries the structure-step quantities only.
    Touched(LedgerRow, StepAudit),
}

fn jacobian_range(grid: &PlateGrid, eta: &[f64]) -> (f64, f64) {
    let (lo, hi) = PlateSampler::new(grid, eta).min_max();
    (1.0 + lo, 1.0 + hi)
}

fn kinetic(mass: &[f64], u: &[f64]) -> f64 {
    0.5 * mass.iter().zip(u).map(|(m, a)| m * a * a).sum::<f64>()
}

impl Setup {
    pub fn new(config: &SimConfig, mode: ExecMode) -> Result<Self> {
        config.validate()?;
        let g = &config.geometry;
        let grid = PlateGrid::new(g.lx, g.ly, g.nx, g.ny)?;
        let basis = GalerkinBasis::build(grid, config.run.k)?;
        let model = PlateModel::new(&config.plate.model, &basis, config.plate.overrides())?;
        let ctx = FspContext::new(ReferenceGrid::new(grid, g.nz)?, &basis)?.with_mode(mode);
        let initial = initial_state(config, &basis, &ctx)?;

        let mc = *model.constants();
        let sampler = Sampler::new(&model, &basis, config.run.seed).with_mode(mode);
        let e0 = kinetic(&ctx.mass_diagonal(&basis.synthesize(&initial.alpha)), &initial.u.data)
            + elastic_energy(&basis, &initial.alpha)
            + 0.5 * initial.beta.iter().map(|b| b * b).sum::<f64>();
        let c_pi = sampler.c_pi_eta0(&initial.alpha, 1000)?;
        let mut constants = PlanConstants {
            c_gamma: 1.0,
            c0: e0 + c_pi,
            c_star: mc.c_star,
            kappa: mc.kappa,
            c_pi_eta0: c_pi,
            e0,
            ..Default::default()
        }
        .derive()?;
        // ‖Δη‖² ≤ C_B along the run, so C_R is sampled on that H² ball
        constants.r = constants.c_b.max(0.0).sqrt();
        constants.c_r =
            if constants.r > 0.0 { sampler.estimate_lipschitz(constants.r, mc.a, config.run.samples)? } else { 0.0 };
        let f0 = model.force(&basis, &vec![0.0; basis.k()])?;
        constants.f0_norm = basis.spectral_norm(&f0, -mc.a)?;
        let assumptions = {
            let co = sampler.check_coercivity(constants.r, config.run.samples)?;
            AssumptionReport {
                model: model.name().into(),
                r: constants.r,
                seed: config.run.seed,
                c_r: constants.c_r,
                kappa: mc.kappa,
                c_star: mc.c_star,
                min_margin: co.min_margin,
                pass: co.pass,
                label: "empirical".into(),
            }
        };
        let r = &config.run;
        let n_min = compute_n_min(&constants, basis.xi(), r.t, config.plate.alpha, mc.a)?;
        let doubled = PlanConstants { c_r: 2.0 * constants.c_r, ..constants };
        let n_min_c_r_doubled = compute_n_min(&doubled, basis.xi(), r.t, config.plate.alpha, mc.a)?.n_min;
        let plan = SplittingPlan::new(r.t, r.k, config.plate.alpha, mc.a, r.n_user, n_min.n_min, r.strict, constants)?;
        Ok(Self { config: config.clone(), basis, model, ctx, initial, plan, n_min, n_min_c_r_doubled, assumptions })
    }
}

/// Projects the initial plate data, maps `u₀` to the reference box and
/// replaces its interface trace by the plate velocity: the mismatch is
/// lifted into the interior and subtracted.
fn initial_state(config: &SimConfig, basis: &GalerkinBasis, ctx: &FspContext) -> Result<InitialState> {
    let alpha = basis.project(&config.initial.eta0.sample(basis)?);
    let beta = basis.project(&config.initial.v0.sample(basis)?);
    let eta = basis.synthesize(&alpha);
    let (j_min, j_max) = jacobian_range(basis.grid(), &eta);
    let g = &ctx.grid;
    let mut u = StaggeredField::zeros(g);
    let mut removed_flux = 0.0;
    if j_min > config.run.j_floor {
        let (lx, ly) = (g.plate.lx, g.plate.ly);
        for comp in 0..3 {
            let sh = g.face_shape(comp);
            for k in 0..sh[2] {
                for j in 0..sh[1] {
                    for i in 0..sh[0] {
                        let f = g.face(comp, i, j, k);
                        if ctx.kinds[f] == FaceKind::Fixed {
                            continue;
                        }
                        let x = g.face_position(comp, i, j, k);
                        let p = le_map(basis.grid(), &eta, [x[0], x[1]], x[2]);
                        u.data[f] = config.initial.u0.eval(lx, ly, p)[comp];
                    }
                }
            }
        }
        let mismatch: Vec<f64> =
            ctx.top_faces.iter().enumerate().map(|(t, f)| u.data[*f] - ctx.top_value(t, &beta)).collect();
        if mismatch.iter().any(|m| *m != 0.0) {
            let lift = lift_top_values(ctx, &mismatch)?;
            removed_flux = lift.removed_flux;
            for (a, b) in u.data.iter_mut().zip(&lift.field.data) {
                *a -= b;
            }
        }
        for (t, f) in ctx.top_faces.iter().enumerate() {
            u.data[*f] = ctx.top_value(t, &beta);
        }
    }
    Ok(InitialState { alpha, beta, u, removed_flux, j_min, j_max })
}

/// Runs the splitting loop: structure step, average rate, fluid step,
/// ledger update and Jacobian guard, for every sub-interval.
pub fn run(setup: &Setup, opts: &RunOptions) -> Result<RunResult> {
    let plan = match opts.n_override {
        Some(n) => setup.plan.with_steps(if setup.plan.strict { n.max(setup.plan.n_min) } else { n }),
        None => setup.plan.clone(),
    };
    let cfg = &setup.config;
    let (basis, model, ctx) = (&setup.basis, &setup.model, &setup.ctx);
    let grid = basis.grid();
    let j_floor = cfg.run.j_floor;
    let init = &setup.initial;

    let mut alpha = init.alpha.clone();
    let mut state = FluidState { u: init.u.clone(), p: vec![0.0; ctx.grid.n_cells()], beta: init.beta.clone() };
    let mut mass = ctx.mass_diagonal(&basis.synthesize(&alpha));
    let mut ledger = EnergyLedger::default();
    let pi0 = model.potential(basis, &alpha)?;
    ledger.f0 = kinetic(&mass, &state.u.data)
        + elastic_energy(basis, &alpha)
        + pi0
        + 0.5 * state.beta.iter().map(|b| b * b).sum::<f64>();
    let mut snapshots = vec![Snapshot { n: 0, t: 0.0, alpha: alpha.clone(), beta: state.beta.clone() }];
    let mut velocities = Vec::new();
    let mut outcome = Outcome::Completed;
    let mut error = None;

    if init.j_min <= j_floor {
        ledger.rows.push(LedgerRow {
            n: 0,
            t: 0.0,
            S: ledger.f0,
            F: ledger.f0,
            J_min: init.j_min,
            J_max: init.j_max,
            energy_kinetic_fluid: kinetic(&mass, &state.u.data),
            energy_elastic: elastic_energy(basis, &alpha),
            energy_plate_kinetic: 0.5 * state.beta.iter().map(|b| b * b).sum::<f64>(),
            potential: pi0,
            ..Default::default()
        });
        ledger.audits.push(StepAudit { fsp_pass: true, f_start: ledger.f0, ..Default::default() });
        outcome = Outcome::TouchedBottom;
    }

    let dt = plan.dt;
    let mut n = 0u64;
    while outcome == Outcome::Completed && n < plan.n {
        let t0 = plan.time(n);
        let step = || -> Result<StepResult> {
            let traj = ssp_step(basis, model, &alpha, &state.beta, t0, dt, cfg.tolerances.tol_ode)?;
            let kin_prev = kinetic(&mass, &state.u.data);
            let se = ssp_energy(basis, model, &traj, kin_prev)?;
            let a1 = traj.end.alpha.clone();
            let eta1 = basis.synthesize(&a1);
            let (j_min, j_max) = jacobian_range(grid, &eta1);
            let el = elastic_energy(basis, &a1);
            let pi = model.potential(basis, &a1)?;
            let mut row = LedgerRow {
                n,
                t: plan.time(n + 1),
                S: se.s_end,
                mismatch_ssp: traj.max_mismatch(),
                J_min: j_min,
                J_max: j_max,
                energy_elastic: el,
                potential: pi,
                ..Default::default()
            };
            let avg = traj.average_rate();
            let qavg = traj.quadrature_average_rate();
            let mut audit = StepAudit {
                ssp_residual: se.residual,
                ssp_mismatch_term: se.mismatch_term,
                f_start: se.f_start,
                average_defect_sq: traj.max_average_defect_sq(),
                average_rate_quadrature_gap: avg.iter().zip(&qavg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
                ..Default::default()
            };
            if j_min <= j_floor {
                audit.fsp_pass = true;
                return Ok(StepResult::Touched(row, audit));
            }
            let inp = FspInputs {
                u_prev: &state.u,
                eta_prev: &alpha,
                eta_next: &a1,
                dteta_avg: &avg,
                dt,
                mu: cfg.physics.mu,
                j_floor,
            };
            let fopts = FspOptions { corrupt_convection_sign: cfg.debug.corrupt_convection_sign };
            let sys = assemble_fsp(ctx, basis, &inp, fopts)?;
            if n == 0 {
                if let Some(d) = &opts.dump_dir {
                    std::fs::create_dir_all(d)?;
                    sys.dump(&d.join("fsp_matrix.mtx"), &d.join("fsp_rhs.mtx"))?;
                }
            }
            let sol = solve_fsp(ctx, &sys, cfg.tolerances.tol_solver)?;
            let fa = fsp_energy_audit(&sys, &sol.state, se.s_end, el + pi);
            row.F = fa.kinetic_fluid + fa.kinetic_plate + el + pi;
            row.D = fa.dissipation;
            row.mismatch_fsp = (2.0 * fa.trace_mismatch).sqrt();
            row.energy_kinetic_fluid = fa.kinetic_fluid;
            row.energy_plate_kinetic = fa.kinetic_plate;
            row.fsp_slack = fa.slack;
            audit.fsp_tolerance = fa.tolerance;
            audit.fsp_pass = fa.pass;
            audit.velocity_jump = fa.velocity_jump;
            audit.trace_mismatch = fa.trace_mismatch;
            audit.velocity_increment_sq = sol.state.beta.iter().zip(&state.beta).map(|(a, b)| (a - b) * (a - b)).sum();
            audit.solver_residual = sol.residual;
            audit.div_residual = sol.div_residual;
            Ok(StepResult::Advanced { row, audit, alpha: a1, state: sol.state, mass: sys.mass_next })
        };
        match step() {
            Ok(StepResult::Advanced { row, audit, alpha: a1, state: st, mass: m }) => {
                ledger.rows.push(row);
                ledger.audits.push(audit);
                alpha = a1;
                state = st;
                mass = m;
                n += 1;
                snapshots.push(Snapshot { n, t: plan.time(n), alpha: alpha.clone(), beta: state.beta.clone() });
                if opts.keep_velocity {
                    velocities.push(state.u.clone());
                }
            }
            Ok(StepResult::Touched(row, audit)) => {
                ledger.rows.push(row);
                ledger.audits.push(audit);
                outcome = Outcome::TouchedBottom;
            }
            Err(e) => {
                outcome = Outcome::Error;
                error = Some(FsiError::Step { step: n as usize, source: Box::new(e) }.to_string());
            }
        }
    }
    let mismatch = mismatch_report(&ledger, &plan);
    let tele = telescoping(&ledger);
    let uniform = uniform_bound(&ledger, plan.constants.c0, 1e-6);
    Ok(RunResult {
        outcome,
        error,
        plan,
        ledger,
        snapshots,
        velocities,
        final_state: state,
        mismatch,
        telescoping: tele,
        uniform,
    })
}
