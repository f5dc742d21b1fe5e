//! Sensor observations derived from a physical run.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::NoiseLevels;
use crate::fleet::{PowertrainKind, VehicleId, VehicleSpec};
use crate::microsim::{aggregate_readings, Corridor, DetectorReading, Origin, Passage, SimOutput};
use crate::rng::StreamRng;

/// A probe (GPS) report of one completed trip's mean speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub vehicle_id: VehicleId,
    pub speed: f64,
}

/// Entry-point classification of a vehicle (toll gantry / camera).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationEvent {
    pub vehicle_id: VehicleId,
    /// Time the vehicle actually entered the corridor.
    pub time: f64,
    pub origin: Origin,
    pub kind: PowertrainKind,
}

/// Everything a partial-information twin may see of the physical run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Observations {
    pub detector_readings: Vec<DetectorReading>,
    pub probe_speeds: Vec<ProbeSample>,
    pub classifications: Vec<ClassificationEvent>,
}

impl Observations {
    /// Observed (id, kind) pairs in entry order.
    pub fn observed_kinds(&self) -> Vec<(VehicleId, PowertrainKind)> {
        self.classifications
            .iter()
            .map(|c| (c.vehicle_id, c.kind))
            .collect()
    }
}

struct Sensor<'a> {
    rng: &'a mut StreamRng,
    drop_rate: f64,
    noise: Normal<f64>,
}

impl Sensor<'_> {
    /// One drop draw, then one noise draw for kept events. The noise draw
    /// happens even when σ = 0 so the stream layout does not depend on σ.
    fn read(&mut self, speed: f64) -> Option<f64> {
        if self.rng.random::<f64>() < self.drop_rate {
            return None;
        }
        Some((speed + self.noise.sample(self.rng)).max(0.0))
    }

    fn keep(&mut self) -> bool {
        self.rng.random::<f64>() >= self.drop_rate
    }
}

/// Derives noisy observations from `output`. The noise stream is consumed
/// in a fixed order: detector passages, probe trips, classification events.
pub fn observe(
    output: &SimOutput,
    fleet: &[VehicleSpec],
    corridor: &Corridor,
    detector_window: f64,
    noise: &NoiseLevels,
    rng: &mut StreamRng,
) -> Observations {
    let mut sensor = Sensor {
        rng,
        drop_rate: noise.count_drop_rate,
        noise: Normal::new(0.0, noise.speed_sigma).expect("validated noise sigma"),
    };

    let passages: Vec<Passage> = output
        .passages
        .iter()
        .filter_map(|p| sensor.read(p.speed).map(|speed| Passage { speed, ..*p }))
        .collect();
    let detector_readings = aggregate_readings(
        &corridor.detector_stations,
        detector_window,
        output.end_time,
        &passages,
    );

    let probe_speeds = output
        .traces
        .iter()
        .filter_map(|t| {
            sensor.read(t.mean_speed).map(|speed| ProbeSample {
                vehicle_id: t.vehicle_id,
                speed,
            })
        })
        .collect();

    let kinds: std::collections::HashMap<VehicleId, PowertrainKind> =
        fleet.iter().map(|s| (s.id, s.powertrain.kind())).collect();
    let classifications = output
        .entries
        .iter()
        .filter(|_| sensor.keep())
        .filter_map(|e| {
            kinds.get(&e.vehicle_id).map(|&kind| ClassificationEvent {
                vehicle_id: e.vehicle_id,
                time: e.time,
                origin: e.origin,
                kind,
            })
        })
        .collect();

    Observations {
        detector_readings,
        probe_speeds,
        classifications,
    }
}
