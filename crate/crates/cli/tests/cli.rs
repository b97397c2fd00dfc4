use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskridge"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.in.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn phase_curve_tabulates_the_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["phase-curve", "--out", "o", "--format", "csv"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("o/phase_curve.csv")).unwrap();
    let rhos = column(&text, "rho");
    let gammas = column(&text, "gamma_star");
    let k = rhos.iter().position(|r| r == "0.5").unwrap();
    let g: f64 = gammas[k].parse().unwrap();
    assert!((g - 0.151265).abs() < 1e-6);
    assert!(!tmp.path().join("o/phase_curve.json").exists());
}

#[test]
fn predict_recovers_the_ridgeless_isotropic_risk() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"grid": {"dim": 400, "alphas": [2.0, 1.0], "lambdas": [1e-8]}}"#);
    let out = run(&["predict", "--config", &cfg, "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("o/predict.csv")).unwrap();
    let gen: f64 = column(&text, "gen_error")[0].parse().unwrap();
    assert!((gen - 2.0).abs() < 1e-4, "{gen}");
    assert_eq!(column(&text, "status"), vec!["ok", "divergent"]);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "predict");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn configuration_errors_exit_with_two_and_list_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"grid": {"dims": 3, "alpha": 2}, "extra": {}}"#);
    let out = run(&["simulate", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for field in ["grid.dims", "grid.alpha", "extra"] {
        assert!(err.contains(field), "{err}");
    }
    assert!(!tmp.path().join("o").exists());

    let cfg = write_config(tmp.path(), r#"{"grid": {"lambdas": [-1, 2]}, "experiment": {"tolerance": 0}}"#);
    let out = run(&["simulate", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grid.lambdas") && err.contains("experiment.tolerance"), "{err}");

    let out = run(&["bbp", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("model") && err.contains("grid.thetas"), "{err}");
}

#[test]
fn echoed_config_reruns_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"model": {"kind": "toeplitz", "rho": 0.5}, "grid": {"dim": 30, "alphas": [0.5, 2.0], "lambdas": [0.01]},
            "experiment": {"trials": 3, "master_seed": 5}, "output": {"dir": "first"}}"#,
    );
    let out = run(&["simulate", "--config", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["simulate", "--config", "first/config.json", "--out", "second"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["simulate.csv", "simulate.json"] {
        let a = fs::read(tmp.path().join("first").join(name)).unwrap();
        let b = fs::read(tmp.path().join("second").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let out = run(&["simulate", "--config", "first/config.json", "--out", "third", "--seed", "6"], tmp.path());
    assert!(out.status.success());
    let a = fs::read(tmp.path().join("first/simulate.csv")).unwrap();
    let c = fs::read(tmp.path().join("third/simulate.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn spectrum_emits_histogram_and_density_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"model": {"kind": "toeplitz", "rho": 0.5}, "grid": {"dim": 60, "alphas": [3.0], "lambdas": [0.01]},
            "experiment": {"trials": 2}}"#,
    );
    let out = run(&["spectrum", "--config", &cfg, "--out", "o", "--format", "csv"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("o/spectrum_curves.csv")).unwrap();
    let series = column(&text, "series");
    assert!(series.iter().any(|s| s == "histogram") && series.iter().any(|s| s == "predicted"));
    assert!(column(&text, "alpha").iter().all(|a| a == "3"));
}

#[test]
fn outlier_sweep_and_pca_comparison_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"model": {"kind": "spiked", "theta": 0.0}, "grid": {"dim": 80, "alphas": [2.0], "lambdas": [1e-5],
            "thetas": [0.2, 4.0]}, "experiment": {"trials": 1, "outlier_margin": 0.05}}"#,
    );
    let out = run(&["bbp", "--config", &cfg, "--out", "b"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("b/bbp.csv")).unwrap();
    assert_eq!(column(&text, "verdict"), vec!["fail", "pass"]);

    let cfg = write_config(
        tmp.path(),
        r#"{"model": {"kind": "toeplitz", "rho": 0.5}, "grid": {"dim": 40, "gammas": [0.1, 0.5]},
            "experiment": {"trials": 1, "population_n": 400}}"#,
    );
    let out = run(&["compare-pca", "--config", &cfg, "--out", "p"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("p/compare_pca.json")).unwrap()).unwrap();
    assert!(report["summary"].as_array().unwrap().iter().any(|m| m["name"] == "gamma_star"));
}

#[test]
fn nothing_is_written_outside_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["predict", "--out", "only"], tmp.path());
    assert!(out.status.success());
    let entries: Vec<String> =
        fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(entries, vec!["only"]);
}
