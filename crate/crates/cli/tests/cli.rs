use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_klyshko-sim");

fn sim(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("KLYSHKO_SIM_THREADS");
    if let Some(t) = threads {
        cmd.env("KLYSHKO_SIM_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn ghost_interference_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "gi.json",
        r#"{"preset": "ghost-interference", "lambda": 7.02e-7, "a": 5e-5, "d": 2e-4, "z2": 1.0}"#,
    );
    let out = dir.path().join("out");
    let o = sim(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--check"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let csv = std::fs::read_to_string(out.join("ghost-interference-coincidence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x_m,rate"));
    assert_eq!(lines.count(), 4096);
    // full precision: every value parses back to a finite double
    for row in csv.lines().skip(1).take(10) {
        let (x, r) = row.split_once(',').unwrap();
        assert!(x.parse::<f64>().unwrap().is_finite() && r.parse::<f64>().unwrap() >= 0.0);
    }

    let report = read_json(&out.join("ghost-interference-report.json"));
    assert_eq!(report["command"], "run");
    let checks = report["run"]["checks"].as_array().unwrap();
    let period = checks.iter().find(|c| c["name"] == "fringePeriod").unwrap();
    let expected = 7.02e-7 * 1.0 / 2e-4;
    assert!((period["value"].as_f64().unwrap() / expected - 1.0).abs() < 0.01);
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert!(report["durationSeconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn compare_litho_writes_three_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = sim(&["run", "--preset", "compare-litho", "--out", out.to_str().unwrap(), "--check"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["quantum", "classical-product", "young"] {
        assert!(out.join(format!("compare-litho-{name}.csv")).exists(), "{name}");
    }
    let report = read_json(&out.join("compare-litho-report.json"));
    let ratio = report["run"]["values"]["periodRatioYoung"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
}

#[test]
fn missing_required_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"preset": "ghost-interference", "a": 5e-5, "d": 2e-4, "z2": 1.0}"#);
    let o = sim(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));
}

#[test]
fn unknown_field_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", "{\n  \"preset\": \"two-path\",\n  \"lamda\": 7e-7\n}\n");
    let o = sim(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("lamda") && err.contains(":3:"), "{err}");
}

#[test]
fn invalid_values_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let neg = write_config(dir.path(), "neg.json", r#"{"preset": "two-path", "lambda": -7e-7, "d": 2e-4, "z2": 1.0}"#);
    assert_eq!(sim(&["run", "--config", &neg, "--out", d], None).status.code(), Some(2));
    assert_eq!(sim(&["run", "--out", d], None).status.code(), Some(2));
    assert_eq!(sim(&["run", "--preset", "two-path", "--out", d], Some("0")).status.code(), Some(2));
    assert_eq!(sim(&["run", "--preset", "two-path", "--out", d], Some("many")).status.code(), Some(2));
    let bad_sweep = sim(&["sweep", "--preset", "two-path", "--param", "lambda", "--values", "1", "--out", d], None);
    assert_eq!(bad_sweep.status.code(), Some(2));
    let nan_sweep = sim(&["sweep", "--preset", "ghost-image", "--param", "S_i", "--values", "x", "--out", d], None);
    assert_eq!(nan_sweep.status.code(), Some(2));
}

#[test]
fn near_field_geometry_is_a_physics_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"preset": "ghost-interference", "lambda": 7.02e-7, "a": 5e-5, "d": 2e-4, "z2": 0.1}"#,
    );
    let o = sim(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn failed_check_exits_four_only_with_check() {
    let dir = tempfile::tempdir().unwrap();
    // a 256-point grid is too narrow to hold the envelope zero
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"preset": "lithography", "lambda": 7.02e-7, "a": 5e-5, "d": 2e-4, "z": 1.0, "grid": {"n": 256}}"#,
    );
    let d = dir.path().to_str().unwrap();
    let o = sim(&["run", "--config", &cfg, "--out", d, "--check"], None);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert_eq!(sim(&["run", "--config", &cfg, "--out", d], None).status.code(), Some(0));
}

#[test]
fn runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"preset": "classical-projection", "lambda": 7.02e-7, "w0": 3e-5, "shotCount": 300, "grid": {"n": 2048}}"#,
    );
    let mut csvs = Vec::new();
    for (i, threads) in [None, None, Some("1")].into_iter().enumerate() {
        let out = dir.path().join(format!("o{i}"));
        let o = sim(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11"], threads);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        csvs.push(std::fs::read(out.join("classical-projection-coincidence.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);

    let out = dir.path().join("other");
    sim(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "12"], None);
    assert_ne!(csvs[0], std::fs::read(out.join("classical-projection-coincidence.csv")).unwrap());
}

#[test]
fn report_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = sim(&["run", "--preset", "ghost-image", "--out", first.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&first.join("ghost-image-report.json"));
    let echo = write_config(dir.path(), "echo.json", &report["config"].to_string());

    let second = dir.path().join("second");
    let o = sim(&["run", "--config", &echo, "--out", second.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(first.join("ghost-image-coincidence.csv")).unwrap(),
        std::fs::read(second.join("ghost-image-coincidence.csv")).unwrap()
    );
}

#[test]
fn single_value_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let run_out = dir.path().join("run");
    let sweep_out = dir.path().join("sweep");
    sim(&["run", "--preset", "two-path", "--out", run_out.to_str().unwrap()], None);
    let o = sim(
        &["sweep", "--preset", "two-path", "--param", "d", "--values", "2e-4", "--out", sweep_out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(run_out.join("two-path-coincidence.csv")).unwrap(),
        std::fs::read(sweep_out.join("two-path-d-0-coincidence.csv")).unwrap()
    );
    let report = read_json(&sweep_out.join("two-path-sweep-d-report.json"));
    assert_eq!(report["sweep"]["points"].as_array().unwrap().len(), 1);
}

#[test]
fn image_distance_sweep_peaks_at_lens_equation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = sim(
        &[
            "sweep", "--preset", "ghost-image", "--param", "S_i", "--values", "1.08,1.14,1.2,1.26,1.32", "--out",
            out.to_str().unwrap(), "--check",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&out.join("ghost-image-sweep-S_i-report.json"));
    assert_eq!(report["sweep"]["argmaxSharpness"].as_f64(), Some(1.2));
    assert_eq!(report["sweep"]["points"].as_array().unwrap().len(), 5);
}
