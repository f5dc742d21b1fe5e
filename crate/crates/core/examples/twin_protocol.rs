//! One physical run, its complete-information replay and a
//! partial-information twin rebuilt from noisy observations.

use twinway::twin::{run_cidt, run_physical, run_pidt};
use twinway::validate::validation_report;
use twinway::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ScenarioConfig::default();
    config.scenario.emission_interval = 40.0;
    let seed = 7;

    let truth = run_physical(&config, seed)?;
    let cidt = run_cidt(&truth, &config)?;
    let pidt = run_pidt(&truth.observations, &config, seed)?;

    let obs = &truth.observations;
    println!(
        "physical: {} vehicles, {} observed at entry, {} probe trips, {} detector windows",
        truth.output.inserted,
        obs.classifications.len(),
        obs.probe_speeds.len(),
        obs.detector_readings.len()
    );
    for (name, costs) in [
        ("physical", &truth.costs),
        ("cidt", &cidt.costs),
        ("pidt", &pidt.costs),
    ] {
        println!(
            "{name:>8}: CO2 {:10.1} g over {} ICEV trips, energy {:8.2} over {} EV trips",
            costs.total_co2_g, costs.icev_trips, costs.total_energy, costs.ev_trips
        );
    }
    for (name, run) in [("cidt", &cidt.output), ("pidt", &pidt.output)] {
        let r = validation_report(run, &truth.output)?;
        println!(
            "{name}: speed accuracy {:.2}%, trip length accuracy {:.2}%, JS {:.4}, W1 {:.3} m/s",
            r.speed_accuracy.unwrap_or(f64::NAN),
            r.trip_length_accuracy.unwrap_or(f64::NAN),
            r.js,
            r.wasserstein
        );
    }
    Ok(())
}
