//! End-to-end runs of the command line, in-process and through the binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use twinway::cli::cli_main;
use twinway::validate::ValidationReport;

const SMALL: &str =
    "seed = 5\n[scenario]\nhorizon = 300.0\nemission_interval = 40.0\n[sweep]\nseeds = 2\n";

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("twinway").chain(args.iter().copied()))
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(&path, SMALL).unwrap();
    path.display().to_string()
}

fn lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn twin_writes_three_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("twin");
    assert_eq!(
        run(&["twin", "--config", &cfg, "--out", out.to_str().unwrap()]),
        0
    );
    for mode in ["physical", "cidt", "pidt"] {
        assert!(out.join(format!("traces_{mode}.csv")).exists());
        assert!(out.join(format!("costs_{mode}.csv")).exists());
    }
    let cidt: ValidationReport =
        serde_json::from_slice(&fs::read(out.join("validation_cidt.json")).unwrap()).unwrap();
    assert_eq!(cidt.speed_accuracy, Some(100.0));
    assert_eq!(cidt.kl, 0.0);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn metrics_of_identical_files_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let sim = dir.path().join("sim");
    assert_eq!(
        run(&["simulate", "--config", &cfg, "--out", sim.to_str().unwrap()]),
        0
    );
    let traces = sim.join("traces_physical.csv");
    let t = traces.to_str().unwrap();
    let out = dir.path().join("metrics");
    assert_eq!(run(&["metrics", t, t, "--out", out.to_str().unwrap()]), 0);
    let r: ValidationReport =
        serde_json::from_slice(&fs::read(out.join("metrics.json")).unwrap()).unwrap();
    for d in [r.kl, r.js, r.wasserstein, r.bhattacharyya] {
        assert!(d.abs() <= 1e-12, "{d}");
    }
}

#[test]
fn simulate_then_replay_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let sim = dir.path().join("sim");
    assert_eq!(
        run(&["simulate", "--config", &cfg, "--out", sim.to_str().unwrap()]),
        0
    );
    let gt = sim.join("ground_truth.json");
    let out = dir.path().join("replay");
    let args = [
        "twin",
        "--config",
        &cfg,
        "--ground-truth",
        gt.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(run(&args), 0);
    assert_eq!(
        fs::read(out.join("traces_cidt.csv")).unwrap(),
        fs::read(sim.join("traces_physical.csv")).unwrap()
    );
}

#[test]
fn sweep_emits_level_by_mode_rows_and_interval_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("sweep");
    assert_eq!(
        run(&[
            "sweep",
            "--config",
            &cfg,
            "--seeds",
            "1",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(lines(&out.join("sweep.csv")), 1 + 5 * 3);
    assert_eq!(lines(&out.join("divergence.csv")), 1 + 4);
    assert!(out.join("sweep.json").exists());
}

#[test]
fn ingest_accepts_valid_and_rejects_invalid_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    let bad = dir.path().join("bad.csv");
    let head = "station_m,window_start_s,window_len_s,count,mean_speed_mps\n";
    fs::write(&good, format!("{head}0,0,60,12,27.5\n")).unwrap();
    fs::write(&bad, format!("{head}0,0,60,-1,27.5\n")).unwrap();
    assert_eq!(run(&["ingest", good.to_str().unwrap()]), 0);
    assert_eq!(
        run(&["ingest", good.to_str().unwrap(), bad.to_str().unwrap()]),
        1
    );
    assert_eq!(
        run(&["ingest", dir.path().join("missing.csv").to_str().unwrap()]),
        1
    );
}

#[test]
fn overrides_are_applied_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(
        run(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            "77",
            "--penetration",
            "1",
            "--out",
            o
        ]),
        0
    );
    let manifest: twinway::io::RunManifest =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.seed, Some(77));
    assert!(manifest.config.unwrap().contains("ev_penetration = 1.0"));
    assert_eq!(run(&["simulate", "--config", &cfg, "--interval", "0"]), 1);
    assert_eq!(run(&["simulate", "--config", "/nonexistent.toml"]), 1);
}

#[test]
fn binary_reports_usage_errors_with_status_2() {
    let bin = env!("CARGO_BIN_EXE_twinway");
    let none = Command::new(bin).output().unwrap();
    assert_eq!(none.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&none.stderr).contains("Usage"));
    let bogus = Command::new(bin)
        .args(["twin", "--frobnicate"])
        .output()
        .unwrap();
    assert_eq!(bogus.status.code(), Some(2));
}
