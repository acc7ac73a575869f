use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(dir: &Path, args: &[&str], config: Option<Value>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_triple-junction"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(cfg) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

/// Rows of a CSV artifact after the schema line, keyed by the header.
fn rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema=triple-junction/"));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect()).collect()
}

fn small(extra: Value) -> Value {
    let mut cfg = json!({ "n": 65, "epsilons": [0.2], "connection_nodes": 400 });
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    cfg
}

#[test]
fn verify_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(dir.path(), "verify.csv");
    assert!(v.starts_with("# schema=triple-junction/verify/1"));
    assert!(!v.contains(",false,"));
    assert!(read(dir.path(), "etilde_scans.csv").starts_with("# schema=triple-junction/etilde-scan/1"));
}

#[test]
fn verify_rejects_corrupted_angles() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify"], Some(json!({ "angles": [2.0, 2.0, 2.0] })));
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("configured_angles"));
}

#[test]
fn verify_equal_tensions_reports_equal_angles() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify"], Some(json!({ "tensions": [1.0, 1.0, 1.0] })));
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("PASS configured_tensions"));
    assert!(out.contains(&format!("{}", TAU / 3.0)[..8]));
}

#[test]
fn angles_from_configured_tensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["angles"], Some(json!({ "tensions": [1.0, 1.0, 1.0] })));
    assert_eq!(code(&o), 0);
    let doc = read_json(dir.path(), "angles.json");
    for a in doc["angles"].as_array().unwrap() {
        assert!((a.as_f64().unwrap() - TAU / 3.0).abs() < 1e-12);
    }

    let o = run(dir.path(), &["angles"], Some(json!({ "tensions": [1.0, 1.0, 3.0] })));
    assert_eq!(code(&o), 2);
}

#[test]
fn sigma_equilateral_and_isoceles() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sigma"], Some(small(json!({}))));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_json(dir.path(), "tensions.json");
    let (a, b, c) = (t["s12"].as_f64().unwrap(), t["s13"].as_f64().unwrap(), t["s23"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-6 && (b - c).abs() < 1e-6);
    for pair in ["12", "13", "23"] {
        assert!(read(dir.path(), &format!("profile_{pair}.csv")).starts_with("# schema=triple-junction/profile/1"));
    }

    let iso = small(json!({ "potential": { "family": "product", "minima": [[-1, 0], [1, 0], [0, 2]] } }));
    let o = run(dir.path(), &["sigma"], Some(iso));
    assert_eq!(code(&o), 0);
    let t = read_json(dir.path(), "tensions.json");
    assert!((t["s13"].as_f64().unwrap() - t["s23"].as_f64().unwrap()).abs() < 1e-6);
    assert!(t["s12"].as_f64().unwrap() < t["s13"].as_f64().unwrap());
}

#[test]
fn sigma_with_degenerate_tensions_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sigma"], Some(small(json!({ "tensions": [1.0, 1.0, 2.0] }))));
    assert_eq!(code(&o), 2);
}

#[test]
fn single_phase_boundary_gives_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("a/b");
    std::fs::create_dir_all(&nested).unwrap();
    let o = run(&nested, &["solve"], Some(small(json!({ "boundary": { "phase": 2 } }))));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&read(&nested, "solve.csv"));
    assert_eq!(r.len(), 1);
    assert!(r[0]["energy"].parse::<f64>().unwrap().abs() < 1e-20);
    assert_eq!(r[0]["converged"], "true");
}

#[test]
fn solve_is_below_competitor_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(json!({ "seed": 7 }));
    let o = run(dir.path(), &["solve"], Some(cfg.clone()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first: Vec<String> = ["solve.csv", "interface_stats.csv", "convergence_eps0.2.csv", "lambda_eps0.2.csv"]
        .iter()
        .map(|f| read(dir.path(), f))
        .collect();
    let r = rows(&first[0]);
    let j: f64 = r[0]["energy"].parse().unwrap();
    let comp: f64 = r[0]["competitor_energy"].parse().unwrap();
    assert!(j <= comp);
    let field = std::fs::read(dir.path().join("out/field_eps0.2.tjf")).unwrap();

    let o = run(dir.path(), &["solve"], Some(cfg));
    assert_eq!(code(&o), 0);
    for (name, before) in ["solve.csv", "interface_stats.csv", "convergence_eps0.2.csv", "lambda_eps0.2.csv"].iter().zip(&first) {
        assert_eq!(&read(dir.path(), name), before, "{name} changed between identical runs");
    }
    assert_eq!(std::fs::read(dir.path().join("out/field_eps0.2.tjf")).unwrap(), field);
}

#[test]
fn budget_exhaustion_exits_3_with_flagged_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["solve"], Some(small(json!({ "solver": { "max_iterations": 5 } }))));
    assert_eq!(code(&o), 3);
    let r = rows(&read(dir.path(), "solve.csv"));
    assert_eq!(r[0]["converged"], "false");
    assert!(dir.path().join("out/field_eps0.2.tjf").exists());
}

#[test]
fn sweep_needs_three_epsilons() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sweep"], Some(small(json!({}))));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["solve", "--eps", "0.1,0.2"], Some(small(json!({}))));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly decreasing"));
    let o = run(dir.path(), &["solve", "--n", "10"], Some(small(json!({}))));
    assert_eq!(code(&o), 1);
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify"], Some(json!({ "epsilon": [0.1] })));
    assert_eq!(code(&o), 1);
}

#[test]
fn sweep_writes_rows_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sweep", "--eps", "0.2,0.15,0.1"], Some(small(json!({}))));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&read(dir.path(), "sweep.csv"));
    let eps: Vec<&str> = r.iter().map(|row| row["epsilon"].as_str()).collect();
    assert_eq!(eps, ["0.2", "0.15", "0.1"]);
    for row in &r {
        assert!(row["energy"].parse::<f64>().unwrap() <= row["competitor_energy"].parse::<f64>().unwrap());
    }
    let fit = rows(&read(dir.path(), "sweep_fit.csv"));
    let names: Vec<&str> = fit.iter().map(|row| row["name"].as_str()).collect();
    assert!(names.contains(&"competitor_exponent") && names.contains(&"localization_c"));
    assert!(fit.iter().find(|row| row["name"] == "alpha").unwrap()["value"].parse::<f64>().is_ok());
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["frobnicate"], None)), 1);
    assert_eq!(code(&run(dir.path(), &["solve", "--n", "many"], None)), 1);
    assert_eq!(code(&run(dir.path(), &["--help"], None)), 0);
}
