use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperconsensus"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn generate_complete_header() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(d.path(), &["generate", "--kind", "complete", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(read(d.path(), "hypergraph.txt").starts_with("4 4\n"));
    assert!(stdout(&o).contains("hyperedges = 4"));
}

#[test]
fn generate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["generate", "--kind", "er", "--n", "200", "--p-edge", "0.05", "--seed", "42"];
    assert_eq!(hc(a.path(), &args).status.code(), Some(0));
    assert_eq!(hc(b.path(), &args).status.code(), Some(0));
    assert_eq!(read(a.path(), "hypergraph.txt"), read(b.path(), "hypergraph.txt"));
}

#[test]
fn generate_torus_counts() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(d.path(), &["generate", "--kind", "torus", "--L", "6", "--d", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(read(d.path(), "hypergraph.txt").starts_with("6 6\n"));
}

#[test]
fn check_disjoint_hyperedges_fails() {
    let d = tempfile::tempdir().unwrap();
    let input = d.path().join("disjoint.txt");
    fs::write(&input, "6 2\n0 1 2\n3 4 5\n").unwrap();
    let o = hc(d.path(), &["check", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("connected = false"));
    assert!(read(d.path(), "check.txt").contains("verdict = fail"));
}

#[test]
fn predict_shift_zero_at_linear() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(d.path(), &["predict", "--p-init", "0.5", "--lambda", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("shift_theorem = 0\n"));
    let json: serde_json::Value = serde_json::from_str(&read(d.path(), "predict.json")).unwrap();
    assert_eq!(json["shift_theorem"], 0);
}

#[test]
fn predict_accepts_negative_lambda() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(d.path(), &["predict", "--p-init", "0.7", "--lambda", "-0.3", "--kind", "complete", "--n", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("graph.predicted_consensus_exact"));
}

#[test]
fn spectra_complete_four() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(d.path(), &["spectra", "--kind", "complete", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let nu: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("nu = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((nu - 1.0 / 3.0).abs() < 1e-12);
    assert!(read(d.path(), "spectrum.csv").starts_with("index,lambda_W,lambda_P\n"));
}

#[test]
fn simulate_modes_and_constant_start() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(d.path(), &["simulate", "--kind", "complete", "--n", "10", "--lambda", "0", "--p-init", "0.7", "--seed", "3"]);
    assert!(stdout(&o).contains("mode = linear"), "{}", stdout(&o));

    let state = d.path().join("ones.txt");
    fs::write(&state, "10 0\n1\n1\n1\n1\n1\n1\n1\n1\n1\n1\n").unwrap();
    let o = hc(d.path(), &["simulate", "--kind", "complete", "--n", "10", "--lambda", "0.2", "--p-init", "1", "--init-file", state.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("steps_to_converge = 0"));
}

#[test]
fn simulate_er_gap_within_acceptance() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(
        d.path(),
        &["simulate", "--kind", "er", "--n", "300", "--p-edge", "0.1", "--p-init", "0.7", "--lambda", "-0.2", "--seed", "5"],
    );
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("gap_ok = true"));
    assert!(read(d.path(), "trace.csv").starts_with("t,vertex,value\n"));
}

#[test]
fn ensemble_outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["ensemble", "--kind", "er", "--n", "40", "--p-edge", "0.3", "--p-init", "0.7", "--lambda", "0.2", "--runs", "8", "--seed", "1"];
    let oa = hc(a.path(), &args);
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "2"]);
    let ob = hc(b.path(), &with_jobs);
    assert!(matches!(oa.status.code(), Some(0 | 1)), "{}", stderr(&oa));
    assert_eq!(oa.status.code(), ob.status.code());
    for f in ["runs.csv", "ensemble.txt", "ensemble.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn config_file_and_flag_override() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("exp.cfg");
    fs::write(&cfg, "# generator\ngraph.kind = complete\ngraph.n = 5\n").unwrap();
    let o = hc(d.path(), &["generate", "--config", cfg.to_str().unwrap(), "--n", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(read(d.path(), "hypergraph.txt").starts_with("6 20\n"));
    let resolved = read(d.path(), "config.txt");
    assert!(resolved.contains("graph.n = 6\n"));
    // The resolved config reproduces the run on its own.
    let again = tempfile::tempdir().unwrap();
    let replay = d.path().join("resolved.cfg");
    fs::write(&replay, resolved).unwrap();
    let o = hc(again.path(), &["generate", "--config", replay.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(d.path(), "hypergraph.txt"), read(again.path(), "hypergraph.txt"));
}

#[test]
fn malformed_config_exits_two_with_line() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    fs::write(&cfg, "graph.kind = er\n\ngraph.n = many\n").unwrap();
    let o = hc(d.path(), &["generate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(hc(d.path(), &["generate"]).status.code(), Some(2));
    assert_eq!(hc(d.path(), &["generate", "--kind", "torus", "--L", "4"]).status.code(), Some(2));
    let bad = d.path().join("bad.txt");
    fs::write(&bad, "4 1\n0 1 9\n").unwrap();
    let o = hc(d.path(), &["check", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert_eq!(hc(d.path(), &["predict", "--p-init", "1.5"]).status.code(), Some(2));
}
