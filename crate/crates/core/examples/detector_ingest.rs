//! Round-trip loop-detector data through CSV and validate an external file.
//!
//! `cargo run --example detector_ingest -- [file.csv]`

use twinway::io::{ingest_detector_csv, read_detector_readings, write_detector_readings};
use twinway::twin::run_physical;
use twinway::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(path) = std::env::args().nth(1) {
        let readings = ingest_detector_csv(path.as_ref())?;
        println!("{path}: {} valid readings", readings.len());
        return Ok(());
    }

    let config = ScenarioConfig::default();
    let truth = run_physical(&config, 3)?;
    let mut csv = Vec::new();
    write_detector_readings(&mut csv, &truth.observations.detector_readings)?;
    let back = read_detector_readings(csv.as_slice())?;
    assert_eq!(back, truth.observations.detector_readings);

    println!("station  vehicles (observed / true)");
    for &station in &config.corridor.detector_stations {
        let count = |rs: &[twinway::microsim::DetectorReading]| -> u64 {
            rs.iter()
                .filter(|r| r.station == station)
                .map(|r| r.count)
                .sum()
        };
        println!(
            "{station:7}  {:4} / {:4}",
            count(&back),
            count(&truth.output.readings)
        );
    }
    print!(
        "\nfirst rows of the CSV:\n{}",
        String::from_utf8(csv)?
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!();

    let bad =
        "station_m,window_start_s,window_len_s,count,mean_speed_mps\n0,0,60,3,27\n0,60,60,-2,27\n";
    match read_detector_readings(bad.as_bytes()) {
        Err(e) => println!("rejected malformed input: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
