use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn liectl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liectl"))
        .args(args)
        .env_remove("LIECTL_TOL")
        .output()
        .expect("spawn liectl")
}

fn stdout(args: &[&str]) -> String {
    let out = liectl(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

/// Parsed CSV rows (header dropped).
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

fn header(csv: &str) -> Vec<String> {
    csv.lines().next().unwrap().split(',').map(str::to_owned).collect()
}

#[test]
fn analyze_reports_structure() {
    let h = json(&["analyze", "--system", "corpus:heisenberg"]);
    assert_eq!(h["structure"]["class"], "nilpotent");
    let dim = |part: &str| h["splitting"][part]["dim"].as_u64();
    assert_eq!((dim("plus"), dim("minus"), dim("zero")), (Some(1), Some(1), Some(1)));

    let a = json(&["analyze", "--system", "corpus:affine"]);
    assert_eq!(a["structure"]["class"], "solvable");
    let mut eig: Vec<f64> =
        a["splitting"]["eigenvalues"].as_array().unwrap().iter().map(|e| e["re"].as_f64().unwrap()).collect();
    eig.sort_by(f64::total_cmp);
    assert!((eig[0] - 0.0).abs() < 1e-12 && (eig[1] - 2.0).abs() < 1e-12, "{eig:?}");

    let s = json(&["analyze", "--system", "corpus:sl2"]);
    assert_eq!(s["structure"]["class"], "non_solvable");
}

#[test]
fn check_verdicts() {
    let status = |args: &[&str]| {
        let mut full = vec!["check", "--format", "json"];
        full.extend_from_slice(args);
        json(&full)["status"].as_str().unwrap().to_owned()
    };
    assert_eq!(status(&["--system", "corpus:heisenberg"]), "NOT_CONTROLLABLE");
    assert_eq!(status(&["--system", "corpus:heisenberg", "--range", "unbounded"]), "UNKNOWN");
    assert_eq!(status(&["--system", "corpus:affine"]), "UNKNOWN");
    assert_eq!(status(&["--system", "corpus:sl2"]), "OUT_OF_THEOREM_SCOPE");
    assert_eq!(status(&["--system", "corpus:sl2", "--range", "unbounded"]), "OUT_OF_THEOREM_SCOPE");
    assert_eq!(status(&["--system", "corpus:heisenberg_rotation"]), "CONTROLLABLE");

    let v = json(&["check", "--format", "json", "--system", "corpus:heisenberg"]);
    let anchors: Vec<&str> = v["certificates"].as_array().unwrap().iter().map(|c| c["anchor"].as_str().unwrap()).collect();
    assert!(anchors.contains(&"nilpotent_bounded_characterization"), "{anchors:?}");

    let text = stdout(&["check", "--system", "corpus:heisenberg"]);
    assert!(text.starts_with("status: NOT_CONTROLLABLE\n"));
}

#[test]
fn check_is_fast_on_every_corpus_system() {
    for name in ["heisenberg", "heisenberg_rotation", "affine", "sl2"] {
        let t = Instant::now();
        let out = liectl(&["check", "--system", &format!("corpus:{name}")]);
        assert!(out.status.success());
        assert!(t.elapsed().as_secs_f64() < 1.0, "{name}: {:?}", t.elapsed());
    }
}

#[test]
fn simulate_zero_control_rests_at_identity() {
    let csv = stdout(&["simulate", "--system", "corpus:heisenberg", "--T", "2", "--h", "0.1"]);
    assert_eq!(header(&csv), ["t", "x0", "x1", "x2"]);
    let r = rows(&csv);
    assert_eq!(r.len(), 21);
    assert!(r.iter().all(|row| row[1..] == [0.0, 0.0, 0.0]));
}

#[test]
fn simulate_affine_drift_is_exponential() {
    let y0 = 0.7;
    let csv = stdout(&["simulate", "--system", "corpus:affine", "--T", "1.5", "--h", "0.01", "--start", "1,0.7"]);
    for row in rows(&csv) {
        let exact = y0 * (2.0 * row[0]).exp();
        assert!((row[2] - exact).abs() <= 1e-8 * exact, "t = {}: {} vs {exact}", row[0], row[2]);
        assert!((row[1] - 1.0).abs() < 1e-15);
    }
}

#[test]
fn simulate_sl2_keeps_unit_determinant() {
    let csv = stdout(&[
        "simulate", "--system", "corpus:sl2", "--T", "4", "--h", "0.01", "--start", "1,0.3,0,1",
        "--control", "1@0.7;-1@1.9;0.4",
    ]);
    assert_eq!(header(&csv).last().unwrap(), "det");
    let r = rows(&csv);
    assert!(r.iter().all(|row| (row[5] - 1.0).abs() < 1e-6));
    assert!(r.iter().any(|row| (row[2] - 0.3).abs() > 0.1), "control had no visible effect");
}

#[test]
fn reach_single_zero_horizon_sample_is_identity() {
    let csv = stdout(&["reach", "--system", "corpus:heisenberg", "--N", "1", "--T", "0"]);
    assert_eq!(rows(&csv), vec![vec![0.0, 0.0, 0.0, 0.0]]);
}

#[test]
fn reach_from_above_one_stays_above() {
    let csv = stdout(&[
        "reach", "--system", "corpus:affine", "--start", "1,1.5", "--N", "200", "--T", "2", "--K", "8", "--seed", "42",
    ]);
    let r = rows(&csv);
    assert_eq!(r.len(), 200);
    let min = r.iter().map(|row| row[2]).fold(f64::INFINITY, f64::min);
    assert!(min > 1.5, "{min}");
}

#[test]
fn reach_is_byte_identical_across_runs_and_executions() {
    let args = ["reach", "--system", "corpus:heisenberg", "--N", "64", "--seed", "7", "--K", "5"];
    let a = stdout(&args);
    let b = stdout(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let c = stdout(&seq);
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("liectl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("verdict.json");
    let out = liectl(&["check", "--system", "corpus:affine", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["status"], "UNKNOWN");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn input_errors_exit_nonzero() {
    let dir = std::env::temp_dir().join(format!("liectl-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\n  \"algebra\": {\"dim\": 2,\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["check", "--system", "/definitely/missing.json"],
        vec!["check", "--system", bad.to_str().unwrap()],
        vec!["check", "--system", "corpus:nope"],
        vec!["simulate", "--system", "corpus:affine", "--control", "5"],
        vec!["simulate", "--system", "corpus:affine", "--start", "1"],
        vec!["reach", "--system", "corpus:affine", "--range", "unbounded"],
    ];
    for args in cases {
        let out = liectl(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
    let parse = liectl(&["check", "--system", bad.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line"), "{}", String::from_utf8_lossy(&parse.stderr));

    let tol = Command::new(env!("CARGO_BIN_EXE_liectl"))
        .args(["check", "--system", "corpus:sl2"])
        .env("LIECTL_TOL", "-1")
        .output()
        .unwrap();
    assert!(!tol.status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tolerance_override_is_applied() {
    let tau = |value: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_liectl"))
            .args(["analyze", "--system", "corpus:heisenberg"])
            .env("LIECTL_TOL", value)
            .output()
            .unwrap();
        assert!(out.status.success());
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["splitting"]["tau"].as_f64().unwrap()
    };
    assert_eq!(tau("1e-3"), 1e-3);
    assert_eq!(tau(""), 1e-8);
}
