use std::path::PathBuf;
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sweepfix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sweepfix")).args(args).output().expect("binary runs")
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exact_check_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("affine_m2_exact.json");
    let out = sweepfix(&["check", "--exact", "--config", path_str(&config), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("dominance.csv")).unwrap();
    assert!(report.starts_with("n,mean,se,bound,margin,pass"));
    assert_eq!(report.lines().count(), 5);
}

#[test]
fn run_oracle_and_bound_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("affine_m2_exact.json");
    let common = ["--config", path_str(&config), "--out", path_str(dir.path()), "--runs", "50", "--seed", "3"];
    for cmd in ["run", "oracle", "bound"] {
        let mut args = vec![cmd];
        args.extend_from_slice(&common);
        let out = sweepfix(&args);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["estimate.csv", "trajectory.csv", "oracle.csv", "bound.csv", "bound_plain.csv"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
    let bound = std::fs::read_to_string(dir.path().join("bound.csv")).unwrap();
    assert!(bound.starts_with("n,chi_n,eta_bar_n,vartheta_bar_n,bound"));
}

#[test]
fn rate_curves_and_ratefit() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweepfix(&["rate-curves", "--chi", "0.2,0.8", "--steps", "10", "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(dir.path().join("curves.svg").exists());

    let config = configs().join("uniform_rate.json");
    let out = sweepfix(&["ratefit", "--config", path_str(&config), "--runs", "200", "--horizon", "80"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("affine_m2_exact.json")).unwrap();

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, text.replace("\"seed\": 7", "\"seed\": 7, \"colour\": 1")).unwrap();
    let out = sweepfix(&["run", "--config", path_str(&unknown), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    let no_relaxation = dir.path().join("lambda.json");
    std::fs::write(&no_relaxation, text.replace("\"value\": 1.0", "\"value\": 0.0")).unwrap();
    let out = sweepfix(&["bound", "--config", path_str(&no_relaxation), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    let out = sweepfix(&["ratefit", "--config", path_str(&configs().join("affine_m4.json")), "--runs", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
