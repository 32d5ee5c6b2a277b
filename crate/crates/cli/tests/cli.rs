use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(format!("{name}.hjmm"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-hjmm"))
        .args(args)
        .env("LEVY_HJMM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn check_vasicek_is_realized_in_one_dimension() {
    let out = run(&["check", corpus("vasicek").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["realization"]["exists"], true);
    assert_eq!(v["realization"]["dimension"], 1);
}

#[test]
fn simulate_both_reports_finite_terminal_gap() {
    let spec = corpus("cp_exponential");
    let out = run(&[
        "simulate",
        spec.to_str().unwrap(),
        "--mode",
        "both",
        "--seed",
        "7",
        "--paths",
        "3",
        "--steps",
        "20",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "terminal_gap").expect("terminal_gap column");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let gap: f64 = row.split(',').nth(col).unwrap().parse().unwrap();
        assert!(gap.is_finite() && gap >= 0.0);
    }
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_seed_is_a_usage_error() {
    let out = run(&["simulate", corpus("vasicek").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_spec_file_is_a_runtime_error() {
    let out = run(&["check", "does/not/exist.hjmm"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_spec_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(corpus("vasicek")).unwrap();
    let broken = dir.path().join("broken.hjmm");
    std::fs::write(&broken, text.replace("lo = -0.5 hi = 0.5", "lo = 0.5 hi = -0.5")).unwrap();
    let out = run(&["check", broken.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("error,k_interior,"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let spec = corpus("merton");
    let args = [
        "simulate",
        spec.to_str().unwrap(),
        "--mode",
        "both",
        "--seed",
        "11",
        "--paths",
        "4",
        "--steps",
        "10",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run(&[&args[..], &["--out", a.path().to_str().unwrap()]].concat());
    let second = run(&[&args[..], &["--out", b.path().to_str().unwrap()]].concat());
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    for file in ["full.csv", "reduced.csv", "psi.csv", "summary.json"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
}

#[test]
fn manifest_records_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = corpus("gamma");
    let out = run(&[
        "martingale",
        spec.to_str().unwrap(),
        "--maturity",
        "1",
        "--seed",
        "5",
        "--paths",
        "8",
        "--steps",
        "20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.code().is_some_and(|c| c <= 1));
    let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["command"], "martingale");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["parameters"]["paths"], 8);
    assert!(m["spec_text"].as_str().unwrap().contains("gamma"));
    assert!(m["files"].as_array().unwrap().iter().any(|f| f == "martingale.json"));
}

#[test]
fn every_subcommand_writes_a_manifest() {
    let vasicek = corpus("vasicek");
    let spec = vasicek.to_str().unwrap();
    let gamma = corpus("gamma");
    let cases: [&[&str]; 5] = [
        &["check", spec],
        &["price", spec, "--maturity", "1"],
        &["moments", gamma.to_str().unwrap(), "-N", "4"],
        &["rank-probe", spec, "--thetas", "1,2"],
        &["series-demo", "--max-degree", "4"],
    ];
    for args in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[args, &["--out", dir.path().to_str().unwrap()]].concat());
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(dir.path().join("manifest.json").exists(), "{args:?}");
    }
}

#[test]
fn price_of_flat_curve_is_exponential() {
    let out = run(&["price", corpus("vasicek").to_str().unwrap(), "--maturity", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = v["price"].as_f64().unwrap();
    assert!((p - (-0.03f64).exp()).abs() < 1e-12, "{p}");
}
