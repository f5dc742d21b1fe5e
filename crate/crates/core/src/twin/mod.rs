//! The physical / CIDT / PIDT protocol.
//!
//! A *physical* run is the full-information surrogate of the real corridor:
//! a fleet with true Euro classes and EV parameters, its trajectories, and
//! the noisy sensor observations derived from them. The complete-information
//! twin (CIDT) replays that run with the exact fleet, demand and routing
//! seed, so its totals must match bit for bit. The partial-information twin
//! (PIDT) only sees [`Observations`]: it rebuilds demand from entry
//! classification events, keeps each vehicle's observed powertrain kind and
//! re-draws everything else from priors before re-simulating.

mod observe;
mod sweep;

pub use observe::{observe, ClassificationEvent, Observations, ProbeSample};
pub use sweep::{
    divergence_by_interval, penetration_sweep, relative_error, sweep_thread_count, DivergenceRow,
    ModeTotals, SweepReport, SweepRow, SweepRun, THREADS_ENV,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ScenarioConfig;
use crate::fleet::{
    compose_fleet, fleet_from_observations, FleetError, FleetStreams, PowertrainKind, VehicleSpec,
    EURO_PRIORS,
};
use crate::microsim::{run_schedule, schedule_demand, Insertion, SimError, SimOutput};
use crate::powertrain::{fleet_totals, CostAggregate, PowertrainError};
use crate::rng::{SeedStreams, Stream};
use crate::validate::ValidateError;

/// Label of the child seed family used by partial-information runs.
pub const PIDT_STREAM: &str = "pidt";

#[derive(Debug, Error)]
pub enum TwinError {
    #[error("twin corridor differs from the ground-truth corridor")]
    CorridorMismatch,
    #[error("no entry events were observed; demand cannot be reconstructed")]
    NoObservedDemand,
    #[error("a sweep needs at least one {0}")]
    EmptySweep(&'static str),
    #[error("cannot build sweep thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Fleet(#[from] FleetError),
    #[error(transparent)]
    Powertrain(#[from] PowertrainError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
}

/// The full-information run and what sensors made of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub config: ScenarioConfig,
    pub schedule: Vec<Insertion>,
    pub fleet: Vec<VehicleSpec>,
    pub output: SimOutput,
    pub observations: Observations,
    pub costs: CostAggregate,
}

impl GroundTruth {
    pub fn routing_seed(&self) -> u64 {
        SeedStreams::new(self.seed).seed(Stream::Routing)
    }
}

/// One twin run: the fleet it used, its trajectories and its cost totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinRun {
    pub fleet: Vec<VehicleSpec>,
    pub output: SimOutput,
    pub costs: CostAggregate,
}

/// Samples demand and a true fleet for `seed`, simulates, prices every trip
/// and derives sensor observations. `config.seed` is ignored in favour of
/// `seed`.
pub fn run_physical(config: &ScenarioConfig, seed: u64) -> Result<GroundTruth, TwinError> {
    let streams = SeedStreams::new(seed);
    let schedule = schedule_demand(
        &config.corridor,
        config.scenario.horizon,
        config.scenario.emission_interval,
        config.scenario.batch_size,
        &mut streams.rng(Stream::Demand),
    )
    .insertions;
    let fleet = compose_fleet(
        schedule.len(),
        config.scenario.ev_penetration,
        &config.dynamics_sampler(),
        &EURO_PRIORS,
        &mut FleetStreams::new(&streams),
    )?;
    let output = run_schedule(config, &schedule, &fleet, streams.seed(Stream::Routing))?;
    let costs = fleet_totals(&output.traces, &fleet, config.scenario.ev_penetration)?;
    let observations = observe(
        &output,
        &fleet,
        &config.corridor,
        config.sim.detector_window,
        &config.noise,
        &mut streams.rng(Stream::Noise),
    );
    Ok(GroundTruth {
        seed,
        config: config.clone(),
        schedule,
        fleet,
        output,
        observations,
        costs,
    })
}

/// Replays the ground truth with its exact fleet, demand and routing seed.
pub fn run_cidt(gt: &GroundTruth, config: &ScenarioConfig) -> Result<TwinRun, TwinError> {
    run_cidt_with_routing_seed(gt, config, gt.routing_seed())
}

/// Like [`run_cidt`] but with a different routing seed: same knowledge of
/// the fleet, different realisation of route choices.
pub fn run_cidt_with_routing_seed(
    gt: &GroundTruth,
    config: &ScenarioConfig,
    routing_seed: u64,
) -> Result<TwinRun, TwinError> {
    if config.corridor != gt.config.corridor {
        return Err(TwinError::CorridorMismatch);
    }
    let output = run_schedule(config, &gt.schedule, &gt.fleet, routing_seed)?;
    let costs = fleet_totals(&output.traces, &gt.fleet, gt.costs.penetration)?;
    Ok(TwinRun {
        fleet: gt.fleet.clone(),
        output,
        costs,
    })
}

/// Rebuilds demand and the fleet from observations alone and re-simulates.
///
/// Each classification event becomes one insertion at its observed entry
/// time and origin. Vehicles keep their observed id and powertrain kind;
/// Euro class, EV parameters, desired speed and route choices are drawn
/// from the `pidt` child streams of `seed`.
pub fn run_pidt(
    observations: &Observations,
    config: &ScenarioConfig,
    seed: u64,
) -> Result<TwinRun, TwinError> {
    if observations.classifications.is_empty() {
        return Err(TwinError::NoObservedDemand);
    }
    let streams = SeedStreams::new(seed).child(PIDT_STREAM);
    let mut events = observations.classifications.clone();
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let schedule: Vec<Insertion> = events
        .iter()
        .map(|e| Insertion {
            time: e.time,
            origin: e.origin,
        })
        .collect();
    let observed: Vec<_> = events.iter().map(|e| (e.vehicle_id, e.kind)).collect();
    let fleet = fleet_from_observations(
        &observed,
        &config.dynamics_sampler(),
        &EURO_PRIORS,
        &mut FleetStreams::new(&streams),
    );
    let evs = observed
        .iter()
        .filter(|(_, k)| *k == PowertrainKind::Ev)
        .count();
    let penetration = evs as f64 / observed.len() as f64;
    let output = run_schedule(config, &schedule, &fleet, streams.seed(Stream::Routing))?;
    let costs = fleet_totals(&output.traces, &fleet, penetration)?;
    Ok(TwinRun {
        fleet,
        output,
        costs,
    })
}
