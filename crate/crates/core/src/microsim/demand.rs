use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Corridor, Origin, RampKind};

/// Reference insertion intervals, seconds.
pub const STANDARD_EMISSION_INTERVALS: [f64; 4] = [10.0, 40.0, 80.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Insertion {
    pub time: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DemandSchedule {
    pub insertions: Vec<Insertion>,
    /// Set when the interval is not one of [`STANDARD_EMISSION_INTERVALS`].
    pub non_standard_interval: bool,
}

impl DemandSchedule {
    pub fn len(&self) -> usize {
        self.insertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insertions.is_empty()
    }
}

/// Batch insertions at `t = 0, interval, 2·interval, … < horizon`, each batch
/// holding `batch_size` vehicles whose origin is drawn from the mainline
/// share and the on-ramp demand shares.
pub fn schedule_demand<R: Rng>(
    corridor: &Corridor,
    horizon: f64,
    interval: f64,
    batch_size: u32,
    rng: &mut R,
) -> DemandSchedule {
    let non_standard_interval = !STANDARD_EMISSION_INTERVALS.contains(&interval);
    let mut insertions = Vec::new();
    if !(horizon > 0.0) || !(interval > 0.0) {
        return DemandSchedule {
            insertions,
            non_standard_interval,
        };
    }

    let mut origins = vec![(Origin::Main, corridor.mainline_share())];
    origins.extend(
        corridor
            .ramps
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind == RampKind::On)
            .map(|(i, r)| (Origin::Ramp(i), r.demand_share)),
    );
    let total: f64 = origins.iter().map(|(_, w)| w).sum();

    let mut k = 0u64;
    loop {
        let time = k as f64 * interval;
        if time >= horizon {
            break;
        }
        for _ in 0..batch_size {
            let origin = if origins.len() == 1 || total <= 0.0 {
                Origin::Main
            } else {
                let mut u = rng.random::<f64>() * total;
                let mut chosen = origins[origins.len() - 1].0;
                for &(origin, weight) in &origins {
                    if u < weight {
                        chosen = origin;
                        break;
                    }
                    u -= weight;
                }
                chosen
            };
            insertions.push(Insertion { time, origin });
        }
        k += 1;
    }
    DemandSchedule {
        insertions,
        non_standard_interval,
    }
}
