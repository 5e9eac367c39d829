//! End-to-end checks of the `thinfilm` binary: exit codes, output formats,
//! and the determinism contract.

use std::path::Path;
use std::process::{Command, Output};

fn thinfilm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinfilm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.conf");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_in(dir: &Path, sub: &str, body: &str, extra: &[&str]) -> Output {
    let cfg = write_config(dir, body);
    let out = dir.join("out");
    let out_s = out.to_str().unwrap().to_string();
    let mut args = vec![sub, "--config", cfg.as_str(), "--out", out_s.as_str()];
    args.extend_from_slice(extra);
    thinfilm(&args)
}

#[test]
fn missing_exponent_exits_one_and_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "simulate", "problem.m = 3.0\n", &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("problem.n"), "stderr: {err}");
}

#[test]
fn unknown_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "simulate",
        "problem.n = 1\nproblem.m = 1\nwhatever.this = 1\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("whatever.this"));
}

#[test]
fn regime_single_cell_and_empty_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "regime",
        "problem.n = 1\nproblem.m = 3\nregime.n_min = 1\nregime.n_max = 1\nregime.n_step = 1\nregime.m_min = 3\nregime.m_max = 3\nregime.m_step = 1\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/regime_map.csv")).unwrap();
    assert_eq!(
        csv,
        "n,m,regime,existence_ok,fsp_ok,blowup_ok\n1,3,Critical,true,true,true\n"
    );

    let dir2 = tempfile::tempdir().unwrap();
    let out = run_in(
        dir2.path(),
        "regime",
        "problem.n = 1\nproblem.m = 3\nregime.n_min = 2\nregime.n_max = 1\nregime.n_step = 1\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir2.path().join("out/regime_map.csv")).unwrap();
    assert_eq!(csv, "n,m,regime,existence_ok,fsp_ok,blowup_ok\n");
}

#[test]
fn regime_zero_step_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "regime",
        "problem.n = 1\nproblem.m = 3\nregime.n_step = 0\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
}

const CONSTANT_RUN: &str = "problem.n = 1.0\nproblem.m = 1.0\nproblem.a0 = 1.0\nproblem.a1 = 0.5\nproblem.a = 0.5\nproblem.nx = 64\nsolver.t_end = 0.01\nsolver.dt_init = 1e-5\ninitial.kind = constant\ninitial.constant = 1.0\n";

#[test]
fn simulate_constant_marks_constancy_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "simulate", CONSTANT_RUN, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["constancy"]["pass"], serde_json::Value::Bool(true));
    assert_eq!(v["command"], "simulate");
    // Ledger columns are pinned.
    let ledger = std::fs::read_to_string(dir.path().join("out/ledger.csv")).unwrap();
    assert!(ledger.starts_with(
        "t,mass,energy,entropy,alpha_entropy,hx_sq,sup,moment,B1,B2,Btilde,x_left,x_right\n"
    ));
    assert!(dir.path().join("out/snapshot_0000.dat").exists());
}

#[test]
fn same_config_twice_is_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let body = "problem.n = 1.0\nproblem.m = 1.0\nproblem.a = 3.141592653589793\nproblem.nx = 64\nsolver.t_end = 0.002\nsolver.dt_init = 1e-5\ninitial.kind = cosine-bump\ninitial.amplitude = 1.0\ninitial.r0 = 1.5\n";
    let out_a = run_in(dir_a.path(), "simulate", body, &[]);
    let out_b = run_in(dir_b.path(), "simulate", body, &[]);
    assert_eq!(out_a.status.code(), Some(0), "{}", String::from_utf8_lossy(&out_a.stderr));
    assert_eq!(out_b.status.code(), Some(0));
    let a = std::fs::read(dir_a.path().join("out/ledger.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("out/ledger.csv")).unwrap();
    assert_eq!(a, b, "ledger.csv differs between identical runs");
}

#[test]
fn report_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "simulate", CONSTANT_RUN, &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let re_serialized = serde_json::to_string_pretty(&parsed).unwrap();
    let reparsed: serde_json::Value = serde_json::from_str(&re_serialized).unwrap();
    assert_eq!(parsed, reparsed);
}

#[test]
fn certify_blowup_guards_positive_energy() {
    let dir = tempfile::tempdir().unwrap();
    // a1 = 0 makes the energy nonnegative; the guard must fire.
    let body = "problem.n = 1.0\nproblem.m = 3.0\nproblem.a1 = 0\nproblem.a = 9.42477796076938\nproblem.nx = 64\ninitial.kind = cosine-bump\ninitial.amplitude = 1.0\ninitial.r0 = 3.141592653589793\n";
    let out = run_in(dir.path(), "certify-blowup", body, &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative"));
}

#[test]
fn dispersion_emits_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let body = "problem.n = 1.0\nproblem.m = 1.0\nproblem.a = 3.141592653589793\nproblem.nx = 64\nsolver.eps = 1e-9\nsolver.dt_init = 0.02\nsolver.dt_max = 0.02\ndispersion.modes = 2\ninitial.kind = constant\ninitial.constant = 1.0\n";
    let out = run_in(dir.path(), "dispersion", body, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/dispersion.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("xi,sigma_measured,sigma_formula,rel_err"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn spreading_requires_droplet_kind() {
    let dir = tempfile::tempdir().unwrap();
    let body = "problem.n = 1.0\nproblem.m = 1.0\ninitial.kind = constant\ninitial.constant = 1.0\n";
    let out = run_in(dir.path(), "spreading", body, &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn snapshot_files_round_trip_as_initial_data() {
    // A snapshot emitted by one run seeds another through initial.kind=file.
    let dir = tempfile::tempdir().unwrap();
    let body = "problem.n = 1.0\nproblem.m = 1.0\nproblem.a = 3.141592653589793\nproblem.nx = 64\nsolver.t_end = 0.001\nsolver.dt_init = 1e-5\ninitial.kind = cosine-bump\ninitial.amplitude = 1.0\ninitial.r0 = 1.5\n";
    let out = run_in(dir.path(), "simulate", body, &[]);
    assert_eq!(out.status.code(), Some(0));
    let snap = dir.path().join("out/snapshot_0001.dat");
    assert!(snap.exists());

    let dir2 = tempfile::tempdir().unwrap();
    let body2 = format!(
        "problem.n = 1.0\nproblem.m = 1.0\nproblem.a = 3.141592653589793\nproblem.nx = 64\nsolver.t_end = 0.001\nsolver.dt_init = 1e-5\ninitial.kind = file\ninitial.path = {}\n",
        snap.display()
    );
    let out2 = run_in(dir2.path(), "simulate", &body2, &[]);
    assert_eq!(out2.status.code(), Some(0), "{}", String::from_utf8_lossy(&out2.stderr));
    let report = std::fs::read_to_string(dir2.path().join("out/report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(v["mass_drift"].as_f64().unwrap() <= 1e-10);

    // A missing file names the path in the error.
    let dir3 = tempfile::tempdir().unwrap();
    let body3 = "problem.n = 1\nproblem.m = 1\ninitial.kind = file\ninitial.path = /nonexistent.dat\n";
    let out3 = run_in(dir3.path(), "simulate", body3, &[]);
    assert_eq!(out3.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out3.stderr).contains("/nonexistent.dat"));
}
