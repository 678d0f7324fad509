use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ilt_lab::{run, Experiment, ExperimentConfig, RunOptions};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("ilt-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn ilt_lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ilt-lab")).args(args).arg("--out").arg(out).output().unwrap()
}

fn write_cfg(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn specfun_check_exits_zero_with_small_residuals() {
    let dir = scratch("specfun");
    let out = ilt_lab(&["specfun-check"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = csv_rows(&dir.join("specfun_check.csv"));
    assert_eq!(rows[0], ["suite", "check", "alpha", "m", "value", "tolerance", "pass"]);
    assert!(rows.len() > 20);
    for r in &rows[1..] {
        let v: f64 = r[4].parse().unwrap();
        let tol: f64 = r[5].trim_start_matches("<= ").parse().unwrap();
        assert!(v <= tol && r[6] == "true", "{r:?}");
    }
    let summary = csv_rows(&dir.join("specfun_check_summary.csv"));
    assert_eq!(summary[0], ["check", "value", "threshold", "pass"]);
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = scratch("usage");
    assert_eq!(ilt_lab(&["no-such-experiment"], &dir).status.code(), Some(2));
    assert_eq!(ilt_lab(&[], &dir).status.code(), Some(2));
    let cfg = write_cfg(&dir, "experiment = phi\nalpha = 1.5\n");
    assert_eq!(ilt_lab(&["phi", "--config", cfg.to_str().unwrap()], &dir).status.code(), Some(2));
    let cfg = write_cfg(&dir, "experiment = phi\nalpha = 0.5\nalpha = 0.25\n");
    assert_eq!(ilt_lab(&["phi", "--config", cfg.to_str().unwrap()], &dir).status.code(), Some(2));
    let cfg = write_cfg(&dir, "experiment = trace\n");
    assert_eq!(ilt_lab(&["phi", "--config", cfg.to_str().unwrap()], &dir).status.code(), Some(2));
}

#[test]
fn step_budget_exits_three() {
    let dir = scratch("budget");
    let cfg = write_cfg(&dir, "experiment = compare\nn_paths = 1e4\ndt = 1e-5\nstep_budget = 1e6\n");
    let out = ilt_lab(&["compare", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg = write_cfg(&dir, "experiment = green\nn_paths = 1e5\nstep_budget = 1e3\n");
    assert_eq!(ilt_lab(&["green", "--config", cfg.to_str().unwrap()], &dir).status.code(), Some(3));
}

#[test]
fn failed_check_exits_one() {
    let dir = scratch("fail");
    let cfg = write_cfg(&dir, "experiment = green\nalpha = 0.4\nm = 1\nn_paths = 2000\nbins = 10\nratio_range = 5, 6\n");
    let out = ilt_lab(&["green", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn dominance_of_a_sample_against_itself() {
    let dir = scratch("dominance");
    let draws: String = (1..=500).map(|k| format!("{}\n", (k as f64).ln())).collect();
    std::fs::write(dir.join("draws.csv"), format!("s\n{draws}")).unwrap();
    let cfg = write_cfg(&dir, "experiment = dominance\nlower_file = draws.csv\nupper_file = draws.csv\n");
    let out = ilt_lab(&["dominance", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(out.status.code(), Some(0));
    let summary = csv_rows(&dir.join("dominance_summary.csv"));
    let row = summary.iter().find(|r| r[0] == "dominance").unwrap();
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn simulate_is_identical_across_worker_counts() {
    let (a, b) = (scratch("sim1"), scratch("sim8"));
    let cfg = write_cfg(&a, "experiment = simulate\nprocess = relativistic\nalpha = 0.3\nm = 1\nn_paths = 8\nT = 0.2\ndt = 1e-4\n");
    let c = cfg.to_str().unwrap();
    assert_eq!(ilt_lab(&["simulate", "--config", c, "--workers", "1", "--seed", "42"], &a).status.code(), Some(0));
    assert_eq!(ilt_lab(&["simulate", "--config", c, "--workers", "8", "--seed", "42"], &b).status.code(), Some(0));
    for name in ["simulate.csv", "simulate_local_time.csv", "simulate_summary.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let other = scratch("sim-seed");
    ilt_lab(&["simulate", "--config", c, "--seed", "43"], &other);
    assert_ne!(std::fs::read(a.join("simulate.csv")).unwrap(), std::fs::read(other.join("simulate.csv")).unwrap());
}

#[test]
fn numbers_are_written_in_full_precision() {
    let dir = scratch("format");
    let mut cfg = ExperimentConfig::new(Experiment::Phi);
    cfg.lambda_grid = Some(vec![0.5, 2.0]);
    let report = run(&cfg, &RunOptions::writing_to(&dir)).unwrap();
    assert!(report.files.iter().all(|f| f.starts_with(&dir)));
    let rows = csv_rows(&dir.join("phi.csv"));
    assert_eq!(rows[0], ["lambda", "phi_stable", "phi_relativistic", "phi_esscher", "abs_diff"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "5.0000000000000000e-1");
    for r in &rows[1..] {
        let back: f64 = r[1].parse().unwrap();
        let again = ilt_lab::output::format_num(back);
        assert_eq!(again, r[1]);
    }
}

#[test]
fn every_experiment_has_a_summary() {
    for e in Experiment::ALL {
        assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
    }
    let report = run(&ExperimentConfig::new(Experiment::Levy), &RunOptions::default()).unwrap();
    assert!(report.files.is_empty());
    assert!(report.table("levy_summary").is_some());
}
