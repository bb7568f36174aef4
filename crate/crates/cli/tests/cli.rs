use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lossrate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossrate"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn fig1_writes_three_value_columns_per_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let out = lossrate(&["fig1", "--out", "f"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for (gamma, tol) in [("0.01", 0.01), ("0.05", 0.05)] {
        let csv = read(dir.path().join(format!("f/fig1_gamma_{gamma}.csv")));
        assert_eq!(
            csv.lines().next().unwrap(),
            "t,sigmax_exact,sigmax_engine_order1,sigmax_paper_order1"
        );
        assert_eq!(csv.lines().count(), 1 + 2001);
        let exact = column(&csv, "sigmax_exact");
        let engine = column(&csv, "sigmax_engine_order1");
        let worst = exact.iter().zip(&engine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= tol, "γ={gamma}: {worst}");
    }
    let summary: Value = serde_json::from_str(&read(dir.path().join("f/fig1_summary.json"))).unwrap();
    assert_eq!(summary["passed"], Value::Bool(true));
    assert!(summary["runtime_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(summary["config"]["name"], "fig1");
    let job = &summary["jobs"][0];
    assert!(job["max_abs_error"]["sigmax"]["engine_order1"].as_f64().is_some());
    assert!(job["max_abs_error"]["sigmax"]["paper_order1"].as_f64().is_some());
    assert_eq!(job["pass"]["sigmax_engine_order1"], Value::Bool(true));
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        assert_eq!(lossrate(&["run", "--preset", "cavity-demo", "--out", out], dir.path()).status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("a/cavity-demo.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/cavity-demo.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'));
    let first = text.lines().nth(1).unwrap();
    // One leading digit, sixteen decimals, exponent.
    for field in first.split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{field}");
    }
}

#[test]
fn lossless_order_zero_series_matches_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "name": "free",
        "model": {"kind": "two-level", "omega": 2.0, "gamma": 0.0, "initial": "plus-x"},
        "grid": {"t1": 5.0},
        "orders": [0],
        "observables": ["sigmax", "sigmaz"],
        "tolerances": {"sigmax_engine_order0": 1e-10, "sigmaz_engine_order0": 1e-10, "sigmaz_paper_order0": 1e-10}
    }"#;
    std::fs::write(dir.path().join("free.json"), cfg).unwrap();
    let out = lossrate(&["run", "--config", "free.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path().join("free.csv"));
    let exact = column(&csv, "sigmax_exact");
    let series = column(&csv, "sigmax_engine_order0");
    assert!(exact.iter().zip(&series).all(|(a, b)| (a - b).abs() <= 1e-10));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| lossrate(args, dir.path()).status.code();

    let unknown = lossrate(&["frobnicate"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));

    assert_eq!(code(&["run", "--config", "missing.json"]), Some(1));
    std::fs::write(dir.path().join("bad.json"), "{\"name\": 3}").unwrap();
    assert_eq!(code(&["run", "--config", "bad.json"]), Some(1));
    assert_eq!(code(&["run", "--preset", "fig2"]), Some(1));
    assert_eq!(code(&["fig1", "--orders", "9"]), Some(1));
    assert_eq!(code(&["dicke", "--N", "2", "--m", "3", "--T", "0.5"]), Some(1));
    assert_eq!(code(&["dicke", "--N", "2", "--m", "1", "--K", "1.0"]), Some(1));

    // Tolerances exceeded: exit 2, files still written.
    assert_eq!(code(&["fig1", "--out", "long", "--t1", "40"]), Some(2));
    assert!(dir.path().join("long/fig1_summary.json").exists());

    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn validate_passes_and_fails_on_a_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    let ok = lossrate(&["validate"], dir.path());
    let text = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(ok.status.code(), Some(0), "{text}");
    assert!(text.contains("0 failed"));

    let coarse = lossrate(&["validate", "--steps", "10"], dir.path());
    assert_eq!(coarse.status.code(), Some(2));
    let text = String::from_utf8_lossy(&coarse.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL  benchmark")), "{text}");
}

#[test]
fn dicke_fidelity_decreases_with_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let out = lossrate(
        &["dicke", "--N", "2", "--m", "1", "--T", "0,0.5,1,2", "--steps", "400", "--out", "d"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&read(dir.path().join("d/dicke_N2_m1_summary.json"))).unwrap();
    let f: Vec<f64> = summary["jobs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|j| j["value_at_t1"]["fidelity_exact"].as_f64().unwrap())
        .collect();
    assert_eq!(f.len(), 4);
    assert!(f.windows(2).all(|w| w[1] < w[0]), "{f:?}");
    for t in ["0", "0.5", "1", "2"] {
        let csv = read(dir.path().join(format!("d/dicke_N2_m1_temperature_{t}.csv")));
        let header = csv.lines().next().unwrap();
        for c in ["fidelity_exact", "fidelity_paper", "dFdK_exact", "dFdK_engine", "dFdK_paper"] {
            assert!(header.split(',').any(|h| h == c), "{c} in {header}");
        }
    }
}
