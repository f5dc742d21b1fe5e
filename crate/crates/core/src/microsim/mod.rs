//! Discrete-time microscopic simulation of a multi-lane motorway corridor.
//!
//! Vehicles follow the Intelligent Driver Model, change lanes with MOBIL,
//! enter from the mainline or on-ramps, and leave at the corridor end or at
//! an off-ramp. Every completed vehicle yields a [`TripTrace`]; loop detector
//! stations aggregate passages into [`DetectorReading`]s.

mod demand;
mod idm;
mod mobil;
mod world;

pub use demand::{schedule_demand, DemandSchedule, Insertion, STANDARD_EMISSION_INTERVALS};
pub use idm::idm_acceleration;
pub use mobil::{mobil_decision, Follower, LaneDecision, LaneNeighbors, Leader, Subject};
pub use world::{aggregate_readings, run, run_schedule, VehicleView, World};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::InvalidParameter;
use crate::fleet::VehicleId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("non-finite input to {what}")]
    NonFinite { what: &'static str },
    #[error(
        "collision at t={time}s in lane {lane}: vehicle {follower} is {gap} m behind vehicle {leader}"
    )]
    Collision {
        time: f64,
        lane: usize,
        leader: VehicleId,
        follower: VehicleId,
        gap: f64,
    },
    #[error("non-positive gap {gap} m passed to the car-following model")]
    NonPositiveGap { gap: f64 },
    #[error("fleet has {fleet} vehicles but {scheduled} insertions are scheduled")]
    InsufficientFleet { fleet: usize, scheduled: usize },
    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error("cannot place vehicle {id}: {reason}")]
    InvalidPlacement { id: VehicleId, reason: String },
    #[error(transparent)]
    InvalidParameter(#[from] InvalidParameter),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampKind {
    On,
    Off,
}

/// A ramp joining the corridor. For on-ramps `demand_share` is the fraction
/// of inserted vehicles that originate there; for off-ramps it is the
/// fraction of passing through-traffic that leaves there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ramp {
    pub position: f64,
    pub kind: RampKind,
    pub demand_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Corridor {
    /// Metres.
    pub length: f64,
    pub lane_count: usize,
    /// Upper bound on any vehicle's desired speed, m/s.
    pub speed_limit: f64,
    pub ramps: Vec<Ramp>,
    /// Loop detector positions, metres.
    pub detector_stations: Vec<f64>,
}

impl Default for Corridor {
    /// 7 km, four lanes, two interchanges (an off-ramp followed by an
    /// on-ramp at each) and seven detector stations.
    fn default() -> Self {
        let ramp = |position, kind| Ramp {
            position,
            kind,
            demand_share: 0.15,
        };
        Self {
            length: 7000.0,
            lane_count: 4,
            speed_limit: 36.11,
            ramps: vec![
                ramp(2300.0, RampKind::Off),
                ramp(2700.0, RampKind::On),
                ramp(4800.0, RampKind::Off),
                ramp(5200.0, RampKind::On),
            ],
            detector_stations: vec![250.0, 1250.0, 2250.0, 3250.0, 4250.0, 5250.0, 6250.0],
        }
    }
}

impl Corridor {
    pub fn validate(&self) -> Result<(), InvalidParameter> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(InvalidParameter::new("length", "must be positive"));
        }
        if self.lane_count == 0 {
            return Err(InvalidParameter::new("lane_count", "must be at least 1"));
        }
        if !(self.speed_limit.is_finite() && self.speed_limit > 0.0) {
            return Err(InvalidParameter::new("speed_limit", "must be positive"));
        }
        let mut on_share = 0.0;
        for (i, ramp) in self.ramps.iter().enumerate() {
            if !(0.0..=self.length).contains(&ramp.position) {
                return Err(InvalidParameter::new(
                    format!("ramps[{i}].position"),
                    format!("must lie in [0, {}]", self.length),
                ));
            }
            if !(0.0..=1.0).contains(&ramp.demand_share) {
                return Err(InvalidParameter::new(
                    format!("ramps[{i}].demand_share"),
                    "must lie in [0, 1]",
                ));
            }
            if ramp.kind == RampKind::On {
                on_share += ramp.demand_share;
            }
        }
        if on_share > 1.0 + 1e-12 {
            return Err(InvalidParameter::new(
                "ramps",
                "on-ramp demand shares sum to more than 1",
            ));
        }
        for (i, &station) in self.detector_stations.iter().enumerate() {
            if !(0.0..=self.length).contains(&station) {
                return Err(InvalidParameter::new(
                    format!("detector_stations[{i}]"),
                    format!("must lie in [0, {}]", self.length),
                ));
            }
        }
        Ok(())
    }

    /// Share of inserted vehicles entering at the upstream mainline end.
    pub fn mainline_share(&self) -> f64 {
        let on: f64 = self
            .ramps
            .iter()
            .filter(|r| r.kind == RampKind::On)
            .map(|r| r.demand_share)
            .sum();
        (1.0 - on).max(0.0)
    }
}

/// Car-following and lane-change parameters of one driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsParams {
    /// v0, m/s.
    pub desired_speed: f64,
    /// a, m/s².
    pub max_accel: f64,
    /// b, m/s².
    pub comfortable_decel: f64,
    /// T, seconds.
    pub headway: f64,
    /// s0, metres.
    pub min_gap: f64,
    /// δ.
    pub accel_exponent: f64,
    /// MOBIL politeness p ∈ [0, 1].
    pub politeness: f64,
    /// MOBIL switching threshold Δa_th, m/s².
    pub lane_change_threshold: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            desired_speed: 33.33,
            max_accel: 1.0,
            comfortable_decel: 2.0,
            headway: 1.2,
            min_gap: 2.0,
            accel_exponent: 4.0,
            politeness: 0.3,
            lane_change_threshold: 0.2,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self, speed_limit: f64) -> Result<(), InvalidParameter> {
        let positive = [
            ("desired_speed", self.desired_speed),
            ("max_accel", self.max_accel),
            ("comfortable_decel", self.comfortable_decel),
            ("headway", self.headway),
            ("min_gap", self.min_gap),
            ("accel_exponent", self.accel_exponent),
            ("lane_change_threshold", self.lane_change_threshold),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(InvalidParameter::new(
                    key,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.politeness) {
            return Err(InvalidParameter::new("politeness", "must lie in [0, 1]"));
        }
        if self.desired_speed > speed_limit {
            return Err(InvalidParameter::new(
                "desired_speed",
                format!("exceeds the corridor speed limit {speed_limit}"),
            ));
        }
        Ok(())
    }
}

/// Numerical and behavioural settings shared by every vehicle in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Seconds.
    pub dt: f64,
    /// Loop detector aggregation window, seconds.
    pub detector_window: f64,
    /// MOBIL b_safe: largest deceleration a lane change may impose, m/s².
    pub safe_decel: f64,
    /// Metres.
    pub vehicle_length: f64,
    /// Minimum time between two lane changes of one vehicle, seconds.
    pub lane_change_cooldown: f64,
    /// A vehicle standing still this long is removed and counted as aborted.
    pub teleport_after: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.5,
            detector_window: 60.0,
            safe_decel: 3.0,
            vehicle_length: 5.0,
            lane_change_cooldown: 3.0,
            teleport_after: 300.0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), InvalidParameter> {
        let fields = [
            ("dt", self.dt),
            ("detector_window", self.detector_window),
            ("safe_decel", self.safe_decel),
            ("vehicle_length", self.vehicle_length),
            ("teleport_after", self.teleport_after),
        ];
        for (key, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(InvalidParameter::new(
                    key,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        if !(self.lane_change_cooldown.is_finite() && self.lane_change_cooldown >= 0.0) {
            return Err(InvalidParameter::new(
                "lane_change_cooldown",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Where a vehicle enters the corridor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Main,
    /// Index into [`Corridor::ramps`].
    Ramp(usize),
}

/// Where a vehicle leaves the corridor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Destination {
    End,
    Ramp(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub position: f64,
    pub lane: usize,
    pub speed: f64,
}

/// The recorded trajectory of one completed trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripTrace {
    pub vehicle_id: VehicleId,
    pub samples: Vec<TraceSample>,
    pub trip_length: f64,
    pub duration: f64,
    /// Space-mean speed, `trip_length / duration`.
    pub mean_speed: f64,
}

impl TripTrace {
    /// Derives length, duration and space-mean speed. Returns `None` unless
    /// there are at least two samples spanning positive time.
    pub fn from_samples(vehicle_id: VehicleId, samples: Vec<TraceSample>) -> Option<Self> {
        let (first, last) = (samples.first()?, samples.last()?);
        let duration = last.t - first.t;
        if !(duration > 0.0) {
            return None;
        }
        let trip_length = last.position - first.position;
        Some(Self {
            vehicle_id,
            trip_length,
            duration,
            mean_speed: trip_length / duration,
            samples,
        })
    }
}

/// One vehicle crossing one detector station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub station: usize,
    pub time: f64,
    pub vehicle_id: VehicleId,
    pub speed: f64,
}

/// Aggregated loop detector output for one station and one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorReading {
    pub station: f64,
    pub window_start: f64,
    pub window_len: f64,
    pub count: u64,
    /// Absent when `count == 0`.
    pub mean_speed: Option<f64>,
}

/// A vehicle actually entering the corridor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub vehicle_id: VehicleId,
    pub scheduled_time: f64,
    pub time: f64,
    pub origin: Origin,
    pub destination: Destination,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub traces: Vec<TripTrace>,
    pub readings: Vec<DetectorReading>,
    pub passages: Vec<Passage>,
    pub entries: Vec<EntryRecord>,
    pub scheduled: usize,
    pub inserted: usize,
    pub completed: usize,
    pub active: usize,
    pub aborted: usize,
    /// Scheduled vehicles still waiting to enter when the run ended.
    pub unserved: usize,
    pub end_time: f64,
}
