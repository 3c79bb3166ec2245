use std::path::Path;
use std::process::{Command, Output};

use ecsim::analysis::NakamotoReport;
use ecsim::io::{read_summary_csv, read_trace_csv};

fn ecsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecsim")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn threshold_prints_the_root() {
    let o = ecsim(&["threshold", "--m", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.196402");
    let o = ecsim(&["threshold", "--m", "3", "--variant", "notiebreak"]);
    assert_eq!(stdout(&o).trim(), "0.512315");
}

#[test]
fn bad_input_exits_with_one() {
    assert_eq!(ecsim(&["threshold", "--m", "0"]).status.code(), Some(1));
    assert_eq!(ecsim(&["threshold", "--m", "5", "--variant", "sideways"]).status.code(), Some(1));
    assert_eq!(ecsim(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(ecsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_strategy_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "strategy = selfish\ntrials = 1\n");
    let o = ecsim(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strategy"));
}

#[test]
fn single_null_trial_writes_one_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "strategy = null\nbeta = 0.2\ntrials = 1\nepochs = 10\n");
    let traces = dir.path().join("traces");
    let o = ecsim(&["simulate", "--config", &cfg, "--emit-traces", traces.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<_> = std::fs::read_dir(&traces).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let rows = read_trace_csv(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows.iter().map(|r| r.epoch).collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
    let summary = read_summary_csv(&stdout(&o)).unwrap();
    assert_eq!(summary.len(), 1);
    assert_eq!(summary[0].persistence_violations, 0);
    assert_eq!(summary[0].successes, 0);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "strategy = nsplit-tiebreak\nbeta = 0.28\ntrials = 4\nepochs = 300\nseed = 5\n");
    let a = ecsim(&["simulate", "--config", &cfg]);
    let b = ecsim(&["simulate", "--config", &cfg, "--jobs", "2"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = ecsim(&["simulate", "--config", &cfg, "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_rejects_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "beta = 0.1, 0.2\ntrials = 1\nepochs = 10\n");
    assert_eq!(ecsim(&["simulate", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.csv");
    let cfg = write_config(
        dir.path(),
        &format!(
            "m = 3, 5\nbeta = 0.1, 0.2\nstrategy = private\ntrials = 2\nepochs = 50\noutput = {}\n",
            out.display()
        ),
    );
    let o = ecsim(&["sweep", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_summary_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let cells: Vec<(f64, f64)> = rows.iter().map(|r| (r.m, r.beta)).collect();
    assert_eq!(cells, vec![(3.0, 0.1), (3.0, 0.2), (5.0, 0.1), (5.0, 0.2)]);
    assert!(rows.iter().all(|r| r.trials == 2 && r.strategy == "private"));
}

#[test]
fn zero_trials_give_a_header_only_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "trials = 0\n");
    let o = ecsim(&["sweep", "--config", &cfg]);
    assert!(o.status.success());
    assert!(read_summary_csv(&stdout(&o)).unwrap().is_empty());
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn detect_nakamoto_reads_an_emitted_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "strategy = null\nm = 1\nbeta = 0\ntrials = 1\nepochs = 200\n");
    let traces = dir.path().join("t");
    assert!(ecsim(&["simulate", "--config", &cfg, "--emit-traces", traces.to_str().unwrap()]).status.success());
    let trace = std::fs::read_dir(&traces).unwrap().next().unwrap().unwrap().path();
    let json = dir.path().join("n.json");
    let o = ecsim(&[
        "detect-nakamoto",
        "--trace",
        trace.to_str().unwrap(),
        "--output",
        json.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: NakamotoReport = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.horizon, 200);
    // Without an adversary every isolated successful epoch counts.
    assert!(!report.epochs.is_empty());

    let short = ecsim(&["detect-nakamoto", "--trace", trace.to_str().unwrap(), "--horizon", "500"]);
    assert_eq!(short.status.code(), Some(1));
    let missing = ecsim(&["detect-nakamoto", "--trace", "/nonexistent/trace.csv"]);
    assert_eq!(missing.status.code(), Some(1));
}
