//! Average-speed cost functions.
//!
//! Combustion vehicles: CO₂ per km as a degree-6 polynomial in speed divided
//! by speed, `k·(a + b·s + c·s² + … + g·s⁶)/s`, with `s` in km/h and the
//! result in g/km.
//!
//! Electric vehicles: consumption per unit distance
//! `α0/v + α1 + α2·v + α3·v²` with `v` in m/s. The absolute unit of the
//! result is whatever the α coefficients carry; all comparisons in this crate
//! are relative.
//!
//! Both models diverge at zero speed, so inputs below [`CO2_MIN_SPEED_KMH`]
//! and [`EV_MIN_SPEED_MPS`] are clamped and the clamp is counted.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fleet::{
    EuroClass, EuroCoefficients, EvParams, Powertrain, PowertrainKind, VehicleId, VehicleSpec,
};
use crate::microsim::TripTrace;

pub const CO2_MIN_SPEED_KMH: f64 = 5.0;
pub const EV_MIN_SPEED_MPS: f64 = 1.0;
const MPS_TO_KMH: f64 = 3.6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowertrainError {
    #[error("no vehicle spec for traced vehicle {0}")]
    MissingSpec(VehicleId),
}

/// Grams of CO₂ per kilometre.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Co2PerDistance(pub f64);

/// Consumption per kilometre, in the units implied by the α coefficients.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EnergyPerDistance(pub f64);

pub fn icev_co2_per_km(speed_kmh: f64, coeff: &EuroCoefficients) -> Co2PerDistance {
    let s = speed_kmh.max(CO2_MIN_SPEED_KMH);
    let poly = [
        coeff.g, coeff.f, coeff.e, coeff.d, coeff.c, coeff.b, coeff.a,
    ]
    .iter()
    .fold(0.0, |acc, c| acc * s + c);
    Co2PerDistance(coeff.k * poly / s)
}

pub fn ev_energy_per_km(speed_mps: f64, p: &EvParams) -> EnergyPerDistance {
    let v = speed_mps.max(EV_MIN_SPEED_MPS);
    EnergyPerDistance(p.alpha0 / v + p.alpha1 + p.alpha2 * v + p.alpha3 * v * v)
}

/// Cost of one trip: grams of CO₂ for an ICEV, energy units for an EV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripCost {
    pub vehicle_id: VehicleId,
    pub kind: PowertrainKind,
    pub value: f64,
    pub distance_km: f64,
    /// Segments whose speed fell below the model's clamp.
    pub clamped_segments: u32,
    /// Set when the trace had fewer than two samples.
    pub empty: bool,
}

/// Sums the per-km rate at each sample interval's mean speed times the
/// interval's distance.
pub fn trip_cost(trace: &TripTrace, spec: &VehicleSpec) -> TripCost {
    let mut cost = TripCost {
        vehicle_id: trace.vehicle_id,
        kind: spec.powertrain.kind(),
        value: 0.0,
        distance_km: 0.0,
        clamped_segments: 0,
        empty: trace.samples.len() < 2,
    };
    for pair in trace.samples.windows(2) {
        let dx = pair[1].position - pair[0].position;
        let dt = pair[1].t - pair[0].t;
        if !(dt > 0.0) {
            continue;
        }
        let speed = dx / dt;
        let km = dx / 1000.0;
        let rate = match &spec.powertrain {
            Powertrain::Icev(class) => {
                let kmh = speed * MPS_TO_KMH;
                if kmh < CO2_MIN_SPEED_KMH {
                    cost.clamped_segments += 1;
                }
                icev_co2_per_km(kmh, &class.coefficients()).0
            }
            Powertrain::Ev(params) => {
                if speed < EV_MIN_SPEED_MPS {
                    cost.clamped_segments += 1;
                }
                ev_energy_per_km(speed, params).0
            }
        };
        cost.value += rate * km;
        cost.distance_km += km;
    }
    cost
}

/// Fleet-level totals for one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CostAggregate {
    pub penetration: f64,
    pub total_co2_g: f64,
    pub total_energy: f64,
    pub co2_by_class: BTreeMap<EuroClass, f64>,
    pub icev_trips: usize,
    pub ev_trips: usize,
    pub clamped_segments: u64,
    pub empty_traces: usize,
}

/// Prices every completed trip. CO₂ counts ICEVs only, energy EVs only.
pub fn fleet_totals(
    traces: &[TripTrace],
    specs: &[VehicleSpec],
    penetration: f64,
) -> Result<CostAggregate, PowertrainError> {
    let by_id: HashMap<VehicleId, &VehicleSpec> = specs.iter().map(|s| (s.id, s)).collect();
    let mut agg = CostAggregate {
        penetration,
        ..CostAggregate::default()
    };
    for trace in traces {
        let spec = by_id
            .get(&trace.vehicle_id)
            .ok_or(PowertrainError::MissingSpec(trace.vehicle_id))?;
        let cost = trip_cost(trace, spec);
        agg.clamped_segments += u64::from(cost.clamped_segments);
        agg.empty_traces += usize::from(cost.empty);
        match spec.powertrain {
            Powertrain::Icev(class) => {
                agg.total_co2_g += cost.value;
                *agg.co2_by_class.entry(class).or_insert(0.0) += cost.value;
                agg.icev_trips += 1;
            }
            Powertrain::Ev(_) => {
                agg.total_energy += cost.value;
                agg.ev_trips += 1;
            }
        }
    }
    Ok(agg)
}

/// One line of the per-trip cost table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub vehicle_id: VehicleId,
    pub kind: PowertrainKind,
    pub class_or_alpha_summary: String,
    pub trip_km: f64,
    pub mean_speed: f64,
    pub cost: f64,
}

pub fn cost_rows(
    traces: &[TripTrace],
    specs: &[VehicleSpec],
) -> Result<Vec<CostRow>, PowertrainError> {
    let by_id: HashMap<VehicleId, &VehicleSpec> = specs.iter().map(|s| (s.id, s)).collect();
    traces
        .iter()
        .map(|trace| {
            let spec = by_id
                .get(&trace.vehicle_id)
                .ok_or(PowertrainError::MissingSpec(trace.vehicle_id))?;
            let cost = trip_cost(trace, spec);
            let summary = match &spec.powertrain {
                Powertrain::Icev(class) => class.name().to_string(),
                Powertrain::Ev(p) => format!(
                    "a0={};a1={};a2={};a3={}",
                    p.alpha0, p.alpha1, p.alpha2, p.alpha3
                ),
            };
            Ok(CostRow {
                vehicle_id: trace.vehicle_id,
                kind: cost.kind,
                class_or_alpha_summary: summary,
                trip_km: trace.trip_length / 1000.0,
                mean_speed: trace.mean_speed,
                cost: cost.value,
            })
        })
        .collect()
}
