//! How closely the partial-information twin reproduces the physical
//! trip-speed distribution as traffic volume grows (shorter emission
//! intervals mean more vehicles).
//!
//! `cargo run --release --example divergence_by_interval -- [seeds]`

use twinway::twin::divergence_by_interval;
use twinway::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(5);
    let config = ScenarioConfig::default();
    let seeds: Vec<u64> = (0..seeds).collect();
    let rows = divergence_by_interval(&config, &config.sweep.intervals, &seeds)?;
    println!("interval [s]        KL        JS   W1 [m/s]  Bhattacharyya");
    for r in rows {
        println!(
            "{:>12}  {:>8.4}  {:>8.4}  {:>9.4}  {:>13.4}",
            r.emission_interval_s, r.kl, r.js, r.wasserstein, r.bhattacharyya
        );
    }
    Ok(())
}
