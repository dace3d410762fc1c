//! End-to-end checks of the experiment driver, its CSV output and the CLI.

use std::process::Command;

use d2d_secrecy::baselines::Scheme;
use d2d_secrecy::config::NetworkConfig;
use d2d_secrecy::harness::table::mean_stderr;
use d2d_secrecy::harness::{read_csv, run_experiment, run_paired, run_snapshot, write_csv, ExperimentKind, ExperimentSpec, SeedTag};
use d2d_secrecy::solver::SolverParams;

fn compare_spec(snapshots: usize) -> ExperimentSpec {
    ExperimentSpec::new(ExperimentKind::Compare, NetworkConfig::tiny(), snapshots)
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan())
}

#[test]
fn csv_round_trip_reproduces_the_table() {
    let table = run_experiment(&compare_spec(4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_csv(&table, &path).unwrap();
    let back = read_csv(&path).unwrap();
    let rows = table.csv_rows();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!((a.scheme, &a.sweep_param, a.seed), (b.scheme, &b.sweep_param, b.seed));
        assert!(same(a.sweep_value, b.sweep_value));
        assert!(same(a.total_secrecy_bps, b.total_secrecy_bps));
        assert!(same(a.mean_secrecy_per_lue_bps, b.mean_secrecy_per_lue_bps));
        assert!(same(a.feasible_fraction, b.feasible_fraction));
        assert!(same(a.outer_iters, b.outer_iters));
        assert!(same(a.wall_ms, b.wall_ms));
    }
}

#[test]
fn aggregates_are_recomputable_from_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let mut spec = ExperimentSpec::new(ExperimentKind::QosSweep, NetworkConfig::tiny(), 5);
    spec.sweep = vec![0.0, 0.1];
    write_csv(&run_experiment(&spec).unwrap(), &path).unwrap();
    let rows = read_csv(&path).unwrap();
    let mut checked = 0;
    for agg in rows.iter().filter(|r| r.seed == SeedTag::Mean) {
        let data: Vec<f64> = rows
            .iter()
            .filter(|r| matches!(r.seed, SeedTag::Seed(_)) && r.scheme == agg.scheme && r.sweep_value == agg.sweep_value)
            .map(|r| r.total_secrecy_bps)
            .filter(|v| !v.is_nan())
            .collect();
        let err = rows
            .iter()
            .find(|r| r.seed == SeedTag::Stderr && r.scheme == agg.scheme && r.sweep_value == agg.sweep_value)
            .unwrap();
        let (m, e) = mean_stderr(&data);
        assert!((m - agg.total_secrecy_bps).abs() <= 1e-12 * m.abs().max(1.0));
        assert!((e - err.total_secrecy_bps).abs() <= 1e-12 * e.abs().max(1.0));
        checked += 1;
    }
    assert_eq!(checked, 2);
}

#[test]
fn output_bytes_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = compare_spec(3);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_csv(&run_experiment(&spec).unwrap(), &a).unwrap();
    write_csv(&run_experiment(&spec).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn schemes_in_a_cell_share_the_snapshot() {
    let cfg = NetworkConfig::tiny();
    let p = SolverParams::default();
    let paired = run_paired(&cfg, 9, &Scheme::ALL, &p, 0.0, false);
    for (r, s) in paired.iter().zip(Scheme::ALL) {
        assert_eq!(*r, run_snapshot(&cfg, 9, s, &p));
    }
}

#[test]
fn cli_compare_writes_one_row_per_scheme_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let res = Command::new(env!("CARGO_BIN_EXE_d2dsec"))
        .args(["compare", "--preset", "tiny", "--snapshots", "100", "--seed", "5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("no --config given"), "{stderr}");
    let rows = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 5 * (100 + 2));
    for s in Scheme::ALL {
        let seeds: Vec<u64> = rows
            .iter()
            .filter(|r| r.scheme == s)
            .filter_map(|r| match r.seed {
                SeedTag::Seed(x) => Some(x),
                _ => None,
            })
            .collect();
        assert_eq!(seeds, (5..105).collect::<Vec<_>>());
    }
}

#[test]
fn cli_reads_a_config_file_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.toml");
    std::fs::write(&cfg_path, NetworkConfig::tiny().to_toml_string()).unwrap();
    let out = dir.path().join("conv.csv");
    let res = Command::new(env!("CARGO_BIN_EXE_d2dsec"))
        .args(["convergence", "--snapshots", "2", "--trace", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(!String::from_utf8_lossy(&res.stderr).contains("no --config given"));
    let trace = std::fs::read_to_string(out.with_extension("trace.csv")).unwrap();
    assert!(trace.starts_with("scheme,seed,sweep_value,iter,subcarrier,objective_nats,lambda_norm,beta_norm,mu_norm,max_log_rho"));
    assert!(trace.lines().count() > 1);
}

#[test]
fn cli_rejects_bad_input() {
    let run = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_d2dsec")).args(args).output().unwrap();
    let zero = run(&["compare", "--preset", "tiny", "--snapshots", "0"]);
    assert!(!zero.status.success());
    assert!(String::from_utf8_lossy(&zero.stderr).contains("snapshots"));
    let bogus = run(&["compare", "--bogus"]);
    assert!(!bogus.status.success());
    assert!(String::from_utf8_lossy(&bogus.stderr).contains("Usage"));
    assert!(!run(&["frobnicate"]).status.success());
    assert!(!run(&["qos-sweep", "--config", "/nonexistent/cfg.toml"]).status.success());
}
