//! EV penetration sweep: seed-averaged CO₂ and EV energy for the physical
//! run and both twins, with the twins' signed errors.
//!
//! `cargo run --release --example penetration_sweep -- [seeds]`

use twinway::twin::penetration_sweep;
use twinway::ScenarioConfig;

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |e| format!("{:+.2}%", 100.0 * e))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(5);
    let config = ScenarioConfig::default();
    let seeds: Vec<u64> = (0..seeds).collect();
    let report = penetration_sweep(&config, &config.sweep.levels, &seeds)?;

    println!("level  physical CO2 [kg]  PIDT err  physical energy  PIDT err  CIDT err");
    for row in &report.rows {
        println!(
            "{:>5.2}  {:>17.1}  {:>8}  {:>15.1}  {:>8}  {:>8}",
            row.level,
            row.physical_co2 / 1000.0,
            pct(row.pidt_co2_error),
            row.physical_energy,
            pct(row.pidt_energy_error),
            pct(row.cidt_co2_error.or(row.cidt_energy_error)),
        );
    }
    Ok(())
}
