//! Per-km CO₂ of each Euro class and EV consumption across speeds.

use twinway::fleet::{rolling_resistance, EvParams, ALPHA1};
use twinway::powertrain::{ev_energy_per_km, icev_co2_per_km};
use twinway::EuroClass;

fn main() {
    println!("speed km/h   Euro4 g/km   Euro5 g/km   Euro6 g/km");
    for s in [5.0, 20.0, 50.0, 80.0, 100.0, 120.0, 140.0] {
        let row: Vec<String> = EuroClass::ALL
            .iter()
            .map(|c| format!("{:11.3}", icev_co2_per_km(s, &c.coefficients()).0))
            .collect();
        println!("{s:10}  {}", row.join("  "));
    }

    let ev = EvParams {
        alpha0: 1.0,
        alpha1: ALPHA1,
        alpha2: rolling_resistance(1),
        alpha3: 3.5e-5,
        n_pass: 1,
    };
    println!("\nEV (α0=1, one passenger)\nspeed m/s   consumption per km");
    for v in [0.5, 1.0, 10.0, 20.0, 30.0, 36.0] {
        println!("{v:9}   {:.7}", ev_energy_per_km(v, &ev).0);
    }
}
