use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn config_value(name: &str) -> Value {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Writes `name` shrunk to a 6×6×4 grid (unless `keep_grid`) into `dir`.
fn write_config(dir: &Path, name: &str, keep_grid: bool, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v = config_value(name);
    if !keep_grid {
        v["geometry"]["nx"] = 6.into();
        v["geometry"]["ny"] = 6.into();
        v["geometry"]["nz"] = 4.into();
    }
    edit(&mut v);
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn fsi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsi")).args(args).current_dir(dir).env_remove("OUTPUT_DIR").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn zero_run_exits_zero_with_zero_ledger() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.json", false, |_| {});
    let out = tmp.path().join("o");
    let o = fsi(tmp.path(), &["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("ledger.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,t,S,F,D,mismatch_ssp,mismatch_fsp,J_min,J_max,energy_kinetic_fluid,energy_elastic,energy_plate_kinetic,potential,fsp_slack"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100);
    for r in rows {
        let f: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[2..7].iter().chain(&f[9..]).all(|v| *v == 0.0), "{r}");
    }
    assert!(out.join("summary.json").exists() && out.join("snapshots.csv").exists());
}

#[test]
fn touching_the_bottom_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "touch_bottom.json", true, |_| {});
    let o = fsi(tmp.path(), &["run", cfg.to_str().unwrap(), "--out", "o"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(s["outcome"], "touched_bottom");
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write_config(tmp.path(), "zero.json", false, |_| {});
    let o = fsi(tmp.path(), &["verify", good.to_str().unwrap(), "--out", "good"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(tmp.path().join("good/verify.json").exists());

    let bad =
        write_config(tmp.path(), "kirchhoff.json", false, |v| v["debug"] = json!({ "corrupt_convection_sign": true }));
    let o = fsi(tmp.path(), &["verify", bad.to_str().unwrap(), "--out", "bad"]);
    assert_eq!(code(&o), 3);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("fsp_skew_zero") && l.contains("FAIL")), "{stdout}");
}

#[test]
fn invalid_config_exits_one_and_lists_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.json", false, |v| {
        v["run"]["T"] = json!(-1.0);
        v["geometry"]["nz"] = 1.into();
        v["physics"]["rho"] = json!(1.0);
    });
    let o = fsi(tmp.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["run.T", "geometry.nz", "physics.rho"] {
        assert!(err.contains(key), "{key} missing: {err}");
    }
    let o = fsi(tmp.path(), &["run", "does-not-exist.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn output_dir_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.json", false, |v| {
        v["output"]["dir"] = json!("from_config");
        v["run"]["N_user"] = 2.into();
    });
    let cfg = cfg.to_str().unwrap();
    let with_env = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_fsi"))
            .args(args)
            .current_dir(tmp.path())
            .env("OUTPUT_DIR", "from_env")
            .output()
            .unwrap()
    };
    assert_eq!(code(&fsi(tmp.path(), &["run", cfg])), 0);
    assert!(tmp.path().join("from_config/summary.json").exists());
    assert_eq!(code(&with_env(&["run", cfg])), 0);
    assert!(tmp.path().join("from_env/summary.json").exists());
    assert_eq!(code(&with_env(&["run", cfg, "--out", "from_flag"])), 0);
    assert!(tmp.path().join("from_flag/summary.json").exists());
}

#[test]
fn debug_dump_writes_matrix_market() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "berger.json", false, |v| {
        v["run"]["strict"] = json!(false);
        v["run"]["N_user"] = 1.into();
    });
    let o = fsi(tmp.path(), &["run", cfg.to_str().unwrap(), "--out", "o", "--debug-dump-system"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = std::fs::read_to_string(tmp.path().join("o/fsp_matrix.mtx")).unwrap();
    assert!(m.starts_with("%%MatrixMarket matrix coordinate real general"));
    assert!(tmp.path().join("o/fsp_rhs.mtx").exists());
}

#[test]
fn eigs_prints_a_consistent_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "kirchhoff.json", false, |_| {});
    let o = fsi(tmp.path(), &["eigs", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let xi: Vec<f64> =
        text.lines().skip(1).take(4).map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap()).collect();
    assert!(xi.windows(2).all(|w| w[0] <= w[1]));
    let field = |label: &str| -> f64 {
        let l = text.lines().find(|l| l.starts_with(label)).unwrap();
        l[label.len()..].split_whitespace().next().unwrap().parse().unwrap()
    };
    // a = 0.5 for the default Kirchhoff model
    let sum: f64 = xi.iter().map(|x| x.powf(0.25)).sum();
    assert!((field("sum xi_i^(a/2)") - sum).abs() <= 1e-9 * sum);
    assert!(field("N_min") >= 1.0);
}

#[test]
fn converge_writes_its_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.json", false, |v| v["run"]["N_user"] = 2.into());
    let o = fsi(tmp.path(), &["converge", cfg.to_str().unwrap(), "--levels", "3", "--out", "c"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(tmp.path().join("c/converge.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "level,N,dt,eta_diff,u_diff,monotone,outcome");
    assert_eq!(csv.lines().count(), 4);
    let o = fsi(tmp.path(), &["converge", cfg.to_str().unwrap(), "--levels", "2"]);
    assert_eq!(code(&o), 1);
}
