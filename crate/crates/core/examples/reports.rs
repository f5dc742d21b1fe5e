//! Emit a twin run's artifacts and manifest into a directory.
//!
//! `cargo run --example reports -- [out-dir]`

use twinway::io::{emit_reports, ReportBundle};
use twinway::powertrain::cost_rows;
use twinway::twin::{run_physical, run_pidt};
use twinway::validate::validation_report;
use twinway::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "twinway-reports".into());
    let config = ScenarioConfig::default();
    let truth = run_physical(&config, config.seed)?;
    let pidt = run_pidt(&truth.observations, &config, config.seed)?;

    let mut bundle = ReportBundle::new("example reports").with_config(&config);
    bundle
        .traces("traces_physical.csv", &truth.output.traces)?
        .traces("traces_pidt.csv", &pidt.output.traces)?
        .costs(
            "costs_pidt.csv",
            &cost_rows(&pidt.output.traces, &pidt.fleet)?,
        )?
        .json(
            "validation_pidt.json",
            &validation_report(&pidt.output, &truth.output)?,
        )?;
    let manifest = emit_reports(&bundle, dir.as_ref())?;
    for out in &manifest.outputs {
        println!(
            "{:<22} {:>8} bytes  sha256 {}",
            out.file,
            out.bytes,
            &out.sha256[..16]
        );
    }
    Ok(())
}
