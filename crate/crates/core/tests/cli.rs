use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scatter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scatter")).args(args).env("SCATTER_THREADS", "1").output().unwrap()
}

/// Run a scenario and return (exit code, run directory if any).
fn run(config: &Path, out: &Path, extra: &[&str]) -> (i32, Option<PathBuf>, String) {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = scatter(&args);
    let stdout = String::from_utf8_lossy(&o.stdout).into_owned();
    let dir = stdout.lines().next().and_then(|l| l.split(" -> ").nth(1)).map(PathBuf::from);
    (o.status.code().unwrap(), dir, stdout + &String::from_utf8_lossy(&o.stderr))
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn patched(src: &str, dir: &Path, name: &str, patch: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(scenarios().join(src)).unwrap()).unwrap();
    patch(&mut v);
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

#[test]
fn trivial_validate_run() {
    let out = tempfile::tempdir().unwrap();
    let (code, dir, log) = run(&scenarios().join("validate.json"), out.path(), &[]);
    assert_eq!(code, 0, "{log}");
    let dir = dir.unwrap();
    let s = summary(&dir);
    assert_eq!(s["status"], "PASS");
    assert!((s["metrics"]["c0_hat"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(s["version"].as_str().unwrap().starts_with("scatterlab "));
    assert_eq!(s["config"]["pipeline"]["kind"], "validate");
    assert!(dir.join("curves").is_dir() && dir.join("fields").is_dir());
}

#[test]
fn short_range_cook_run() {
    let out = tempfile::tempdir().unwrap();
    let (code, dir, log) = run(&scenarios().join("cook_short_range.json"), out.path(), &[]);
    assert_eq!(code, 0, "{log}");
    let dir = dir.unwrap();
    let s = summary(&dir);
    assert!(s["metrics"]["isometry_defect"].as_f64().unwrap() < 1e-3);
    assert!(dir.join("fields/w.bin").exists());
    let csv = std::fs::read_to_string(dir.join("curves/integrand.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,integrand"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn long_range_plain_cook_reports_failure() {
    let out = tempfile::tempdir().unwrap();
    let (code, dir, log) = run(&scenarios().join("cook_long_range.json"), out.path(), &[]);
    assert_eq!(code, 2, "{log}");
    assert_eq!(summary(&dir.unwrap())["status"], "FAIL");
}

#[test]
fn window_at_threshold_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = patched("mourre.json", tmp.path(), "bad.json", |v| v["window"] = serde_json::json!([-1.0, 0.0]));
    let (code, dir, log) = run(&cfg, tmp.path(), &[]);
    assert_eq!(code, 1);
    assert!(dir.is_none());
    assert!(log.contains("spectral_diagnostics.WindowTouchesThreshold"), "{log}");
}

#[test]
fn validate_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let o = scatter(&["validate", scenarios().join("lap.json").to_str().unwrap()]);
    assert!(o.status.success());
    let cfg = patched("lap.json", tmp.path(), "typo.json", |v| v["grid"]["nn"] = 3.into());
    let o = scatter(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cli_runner.ConfigInvalid"));
}

#[test]
fn every_shipped_scenario_validates() {
    for entry in std::fs::read_dir(scenarios()).unwrap() {
        let p = entry.unwrap().path();
        let o = scatter(&["validate", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn compare_identical_refined_and_drifted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    let coarse = patched("mourre.json", tmp.path(), "coarse.json", |v| v["grid"]["n"] = 500.into());
    let (_, a, _) = run(&coarse, &out, &[]);
    let (_, b, _) = run(&coarse, &out, &[]);
    let (_, fine, _) = run(&scenarios().join("mourre.json"), &out, &[]);
    let (_, other, _) = run(&scenarios().join("validate.json"), &out, &[]);
    let (a, b, fine, other) = (a.unwrap(), b.unwrap(), fine.unwrap(), other.unwrap());

    let o = scatter(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success());
    let d: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(d["entries"].as_array().unwrap().len(), 0);

    // n vs 2n: alpha_hat moves by less than 10%
    let o = scatter(&["compare", a.to_str().unwrap(), fine.to_str().unwrap()]);
    let d: Value = serde_json::from_slice(&o.stdout).unwrap();
    let alpha = d["entries"].as_array().unwrap().iter().find(|e| e["key"] == "alpha_hat").unwrap();
    assert!(alpha["rel"].as_f64().unwrap() < 0.1, "{alpha}");
    assert!(o.status.success());

    let o = scatter(&["compare", a.to_str().unwrap(), other.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cli_runner.SchemaDrift"));
}

#[test]
fn seeded_reruns_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("lap.json");
    let (c1, a, _) = run(&cfg, tmp.path(), &["--seed", "42"]);
    let (c2, b, _) = run(&cfg, tmp.path(), &["--seed", "42"]);
    assert_eq!((c1, c2), (0, 0));
    let (a, b) = (a.unwrap(), b.unwrap());
    assert_eq!(summary(&a)["config"]["seed"], 42);
    let read = |d: &Path| std::fs::read(d.join("curves/resolvent.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}
