//! Writers and readers are exact inverses on simulated data; emitted
//! reports are reproducible and listed in the manifest.

use std::fs;

use twinway::config::parse_config;
use twinway::io::{
    emit_reports, read_costs, read_detector_readings, read_divergences, read_fleet, read_traces,
    sha256_hex, write_costs, write_detector_readings, write_divergences, write_fleet, write_traces,
    IoError, ReportBundle, RunManifest, MANIFEST_FILE,
};
use twinway::powertrain::cost_rows;
use twinway::twin::{divergence_by_interval, run_physical, GroundTruth};
use twinway::ScenarioConfig;

fn small() -> ScenarioConfig {
    parse_config("seed = 21\n[scenario]\nhorizon = 400.0\nemission_interval = 40.0\n").unwrap()
}

fn ground_truth() -> GroundTruth {
    let c = small();
    run_physical(&c, c.seed).unwrap()
}

#[test]
fn traces_round_trip() {
    let gt = ground_truth();
    let mut buf = Vec::new();
    write_traces(&mut buf, &gt.output.traces).unwrap();
    assert_eq!(read_traces(buf.as_slice()).unwrap(), gt.output.traces);
}

#[test]
fn detector_readings_round_trip() {
    let gt = ground_truth();
    for readings in [&gt.output.readings, &gt.observations.detector_readings] {
        let mut buf = Vec::new();
        write_detector_readings(&mut buf, readings).unwrap();
        assert_eq!(&read_detector_readings(buf.as_slice()).unwrap(), readings);
    }
}

#[test]
fn fleet_round_trips_bit_exactly() {
    let c = small();
    let gt = ground_truth();
    let mut buf = Vec::new();
    write_fleet(&mut buf, &gt.fleet).unwrap();
    let back = read_fleet(buf.as_slice(), &c.dynamics).unwrap();
    assert_eq!(back, gt.fleet);
    let mut again = Vec::new();
    write_fleet(&mut again, &back).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn costs_and_divergences_round_trip() {
    let gt = ground_truth();
    let rows = cost_rows(&gt.output.traces, &gt.fleet).unwrap();
    let mut buf = Vec::new();
    write_costs(&mut buf, &rows).unwrap();
    assert_eq!(read_costs(buf.as_slice()).unwrap(), rows);

    let div = divergence_by_interval(&small(), &[100.0, 40.0], &[1]).unwrap();
    let mut buf = Vec::new();
    write_divergences(&mut buf, &div).unwrap();
    assert_eq!(read_divergences(buf.as_slice()).unwrap(), div);
}

#[test]
fn ground_truth_json_round_trips() {
    let gt = ground_truth();
    let json = serde_json::to_string(&gt).unwrap();
    let back: GroundTruth = serde_json::from_str(&json).unwrap();
    assert_eq!(back, gt);
}

#[test]
fn divergence_table_has_one_row_per_interval() {
    let mut c = small();
    c.scenario.horizon = 200.0;
    let rows = divergence_by_interval(&c, &c.sweep.intervals, &[3]).unwrap();
    let got: Vec<f64> = rows.iter().map(|r| r.emission_interval_s).collect();
    assert_eq!(got, vec![10.0, 40.0, 80.0, 100.0]);
}

fn bundle(gt: &GroundTruth, config: &ScenarioConfig) -> ReportBundle {
    let mut b = ReportBundle::new("simulate").with_config(config);
    b.traces("traces.csv", &gt.output.traces)
        .unwrap()
        .fleet("fleet.csv", &gt.fleet)
        .unwrap()
        .detectors("detectors.csv", &gt.output.readings)
        .unwrap()
        .json("costs.json", &gt.costs)
        .unwrap();
    b
}

#[test]
fn emission_is_reproducible_and_hashed() {
    let config = small();
    let gt = ground_truth();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = emit_reports(&bundle(&gt, &config), a.path()).unwrap();
    let regenerated = run_physical(&config, config.seed).unwrap();
    let mb = emit_reports(&bundle(&regenerated, &config), b.path()).unwrap();
    assert_eq!(ma, mb);
    assert_eq!(ma.outputs.len(), 4);
    for entry in &ma.outputs {
        let bytes = fs::read(a.path().join(&entry.file)).unwrap();
        assert_eq!(sha256_hex(&bytes), entry.sha256);
        assert_eq!(bytes, fs::read(b.path().join(&entry.file)).unwrap());
    }
    let on_disk: RunManifest =
        serde_json::from_slice(&fs::read(a.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, ma);
    assert_eq!(
        parse_config(on_disk.config.as_deref().unwrap()).unwrap(),
        config
    );
}

#[test]
fn empty_bundle_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = emit_reports(&ReportBundle::new("sweep"), dir.path()).unwrap();
    assert!(m.outputs.is_empty());
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
}

#[test]
fn unwritable_target_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not-a-dir");
    fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("out");
    let err = emit_reports(&bundle(&ground_truth(), &small()), &target).unwrap_err();
    assert!(matches!(err, IoError::Unwritable { .. }), "{err}");
    assert_eq!(fs::read(&blocker).unwrap(), b"x");
}
