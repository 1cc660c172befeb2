use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fsi_core::config::SimConfig;
use fsi_core::harness::{self, VerifyOptions};
use fsi_core::output;
use fsi_core::splitting::{run, Outcome, RunOptions, Setup};
use fsi_core::{ExecMode, FsiError};

const EXIT_ERROR: u8 = 1;
const EXIT_TOUCHED_BOTTOM: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "fsi", version, about = "Lie-splitting plate/fluid interaction solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration file.
    config: PathBuf,
    /// Output directory (overrides $OUTPUT_DIR and output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the first fluid system and right-hand side as Matrix Market.
    #[arg(long)]
    debug_dump_system: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the splitting scheme and write ledger.csv, summary.json, snapshots.
    Run(Common),
    /// Run the verification suites; exit 3 if any fails.
    Verify(Common),
    /// Refinement study over step counts N_min * 2^l.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Print the basis eigenvalues and the step-count breakdown.
    Eigs(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn load(c: &Common) -> Result<(SimConfig, PathBuf), FsiError> {
    let cfg = SimConfig::load(&c.config)?;
    let out = cfg.output_dir(c.out.as_deref());
    Ok((cfg, out))
}

fn dump_dir(c: &Common, out: &Path) -> Option<PathBuf> {
    c.debug_dump_system.then(|| out.to_path_buf())
}

fn dispatch(cmd: Cmd) -> Result<u8, FsiError> {
    match cmd {
        Cmd::Run(c) => {
            let (cfg, out) = load(&c)?;
            let setup = Setup::new(&cfg, ExecMode::default())?;
            let r = run(&setup, &RunOptions { dump_dir: dump_dir(&c, &out), ..Default::default() })?;
            let s = output::write_run(&out, &setup, &r)?;
            println!(
                "{}: {:?} after {} of {} steps (N_min {}), min fsp slack {:.3e}, max ssp residual {:.3e}",
                s.model, s.outcome, s.steps_completed, s.n, s.n_min, s.max_slacks.fsp_slack, s.max_slacks.ssp_residual
            );
            println!("outputs in {}", out.display());
            Ok(match r.outcome {
                Outcome::Completed => 0,
                Outcome::TouchedBottom => {
                    eprintln!("plate touched the bottom: J_min {:.6} <= j_floor {}", s.final_j_min, cfg.run.j_floor);
                    EXIT_TOUCHED_BOTTOM
                }
                Outcome::Error => {
                    eprintln!("error: {}", r.error.unwrap_or_default());
                    EXIT_ERROR
                }
            })
        }
        Cmd::Verify(c) => {
            let (cfg, out) = load(&c)?;
            let rep =
                harness::verify(&cfg, &VerifyOptions { mode: ExecMode::default(), dump_dir: dump_dir(&c, &out) })?;
            for s in &rep.suites {
                println!("{:<20} {}  {}", s.name, if s.pass { "PASS" } else { "FAIL" }, s.detail);
            }
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("verify.json"), serde_json::to_string_pretty(&rep)?)?;
            Ok(if rep.pass { 0 } else { EXIT_VERIFY_FAILED })
        }
        Cmd::Converge { common: c, levels } => {
            let (cfg, out) = load(&c)?;
            let rep = harness::converge(&cfg, levels, ExecMode::default())?;
            println!("{:>5} {:>8} {:>12} {:>14} {:>14}  monotone", "level", "N", "dt", "eta_diff", "u_diff");
            for r in &rep.rows {
                println!(
                    "{:>5} {:>8} {:>12.4e} {:>14.6e} {:>14.6e}  {}",
                    r.level, r.n, r.dt, r.eta_diff, r.u_diff, r.monotone
                );
            }
            std::fs::create_dir_all(&out)?;
            output::write_converge_csv(std::fs::File::create(out.join("converge.csv"))?, &rep.rows)?;
            std::fs::write(out.join("converge.json"), serde_json::to_string_pretty(&rep)?)?;
            Ok(if rep.pass { 0 } else { EXIT_VERIFY_FAILED })
        }
        Cmd::Eigs(c) => {
            let (cfg, _) = load(&c)?;
            let e = harness::eigs(&cfg, ExecMode::default())?;
            println!("{:>4} {:>22} {:>22}", "i", "xi_i", "rayleigh_i");
            for (i, (x, r)) in e.xi.iter().zip(&e.rayleigh).enumerate() {
                println!("{:>4} {:>22.12e} {:>22.12e}", i + 1, x, r);
            }
            let b = &e.breakdown;
            println!("xi_k               {:.12e}", b.xi_k);
            println!("sum xi_i^(a/2)     {:.12e}  (a = {})", b.sum_xi_a2, b.a);
            println!("2 xi_k C_B         {:.12e}", b.term_basis);
            println!("Lipschitz term     {:.12e}", b.term_lipschitz);
            println!("exponent 1/(2-alpha) {:.12}  (alpha = {})", b.exponent, b.alpha);
            println!("T * base^exponent  {:.12e}", b.pre_ceil);
            println!("N_min              {}", b.n_min);
            println!("N_min (2 C_R)      {}", e.n_min_c_r_doubled);
            Ok(0)
        }
    }
}
