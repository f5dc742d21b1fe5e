//! Fleet composition and per-vehicle powertrain parameters.
//!
//! Combustion vehicles get a Euro emission class drawn from registration
//! priors; electric vehicles get the four consumption coefficients drawn
//! from their loss-source distributions. [`degrade_to_partial`] replaces
//! everything sensors cannot observe with fresh draws.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::microsim::DynamicsParams;
use crate::rng::{SeedStreams, Stream, StreamRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FleetError {
    #[error("EV penetration must lie in [0, 1], got {0}")]
    InvalidPenetration(f64),
    #[error("Euro class priors must be non-negative and sum to 1, got {0:?}")]
    InvalidPriors([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub u64);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EuroClass {
    Euro4,
    Euro5,
    Euro6,
}

impl EuroClass {
    pub const ALL: [EuroClass; 3] = [EuroClass::Euro4, EuroClass::Euro5, EuroClass::Euro6];

    /// CO₂ average-speed coefficients. Only `b` differs between classes.
    pub fn coefficients(self) -> EuroCoefficients {
        let b = match self {
            EuroClass::Euro4 => 1.5599e2,
            EuroClass::Euro5 => 1.2877e2,
            EuroClass::Euro6 => 1.0571e2,
        };
        EuroCoefficients {
            a: 3.7473e3,
            b,
            c: -8.5270e-1,
            d: 1.0318e-2,
            e: 0.0,
            f: 0.0,
            g: 0.0,
            k: 1.0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EuroClass::Euro4 => "Euro4",
            EuroClass::Euro5 => "Euro5",
            EuroClass::Euro6 => "Euro6",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Polynomial coefficients of the per-km CO₂ model, speed in km/h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuroCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub k: f64,
}

/// Probabilities of (Euro 4, Euro 5, Euro 6) among combustion vehicles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuroPriors([f64; 3]);

/// Registration-based class shares: 14.8% Euro 4, 21.8% Euro 5, 63.4% Euro 6.
pub const EURO_PRIORS: EuroPriors = EuroPriors([0.148, 0.218, 0.634]);

impl EuroPriors {
    pub fn new(p: [f64; 3]) -> Result<Self, FleetError> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|x| !(*x >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(FleetError::InvalidPriors(p));
        }
        Ok(Self(p))
    }

    pub fn probabilities(&self) -> [f64; 3] {
        self.0
    }

    pub fn probability(&self, class: EuroClass) -> f64 {
        self.0[class.index()]
    }
}

impl Default for EuroPriors {
    fn default() -> Self {
        EURO_PRIORS
    }
}

/// Drivetrain loss term, identical for every EV.
pub const ALPHA1: f64 = 5e-4;
pub const CURB_MASS_KG: f64 = 1235.0;
pub const PASSENGER_MASS_KG: f64 = 80.0;

/// Coefficients of the EV consumption-per-distance polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvParams {
    /// Ancillary power, 0.2 + U(0, 2).
    pub alpha0: f64,
    /// Drivetrain losses.
    pub alpha1: f64,
    /// Rolling resistance, mass dependent.
    pub alpha2: f64,
    /// Aerodynamic losses.
    pub alpha3: f64,
    pub n_pass: u8,
}

/// α2 for a vehicle carrying `n_pass` passengers.
pub fn rolling_resistance(n_pass: u8) -> f64 {
    0.0293 + 0.05 * ((CURB_MASS_KG + PASSENGER_MASS_KG * f64::from(n_pass)) / CURB_MASS_KG)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowertrainKind {
    Icev,
    Ev,
}

impl PowertrainKind {
    pub fn name(self) -> &'static str {
        match self {
            PowertrainKind::Icev => "icev",
            PowertrainKind::Ev => "ev",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Powertrain {
    Icev(EuroClass),
    Ev(EvParams),
}

impl Powertrain {
    pub fn kind(&self) -> PowertrainKind {
        match self {
            Powertrain::Icev(_) => PowertrainKind::Icev,
            Powertrain::Ev(_) => PowertrainKind::Ev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub id: VehicleId,
    pub powertrain: Powertrain,
    pub dynamics: DynamicsParams,
}

pub fn sample_euro_class<R: Rng + ?Sized>(rng: &mut R, priors: &EuroPriors) -> EuroClass {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for class in EuroClass::ALL {
        acc += priors.probability(class);
        if u < acc {
            return class;
        }
    }
    // Rounding can leave `acc` a hair below 1; the last class with mass wins.
    EuroClass::ALL
        .into_iter()
        .rev()
        .find(|c| priors.probability(*c) > 0.0)
        .unwrap_or(EuroClass::Euro6)
}

pub fn sample_ev_params<R: Rng + ?Sized>(rng: &mut R) -> EvParams {
    let alpha0 = 0.2 + rng.random_range(0.0..2.0);
    let n_pass: u8 = rng.random_range(1..=4);
    let aero = Normal::new(3.12e-5, 5e-6).expect("valid normal");
    let p_aer = loop {
        let draw = aero.sample(rng);
        if draw > 0.0 {
            break draw;
        }
    };
    EvParams {
        alpha0,
        alpha1: ALPHA1,
        alpha2: rolling_resistance(n_pass),
        alpha3: p_aer + 4e-6,
        n_pass,
    }
}

/// Draws a driver's dynamics: the base parameters with the desired speed
/// scaled by a uniform factor in `[1 - jitter, 1 + jitter]`, capped at the
/// corridor speed limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsSampler {
    pub base: DynamicsParams,
    pub jitter: f64,
    pub speed_cap: f64,
}

impl DynamicsSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DynamicsParams {
        let factor = if self.jitter > 0.0 {
            rng.random_range(1.0 - self.jitter..=1.0 + self.jitter)
        } else {
            1.0
        };
        DynamicsParams {
            desired_speed: (self.base.desired_speed * factor).min(self.speed_cap),
            ..self.base
        }
    }
}

/// The generators used for fleet sampling, one per dimension.
#[derive(Debug, Clone)]
pub struct FleetStreams {
    pub composition: StreamRng,
    pub class: StreamRng,
    pub ev: StreamRng,
    pub jitter: StreamRng,
}

impl FleetStreams {
    pub fn new(streams: &SeedStreams) -> Self {
        Self {
            composition: streams.rng(Stream::Composition),
            class: streams.rng(Stream::Class),
            ev: streams.rng(Stream::EvParams),
            jitter: streams.rng(Stream::Jitter),
        }
    }
}

pub fn ev_count(n: usize, penetration: f64) -> usize {
    (n as f64 * penetration).round() as usize
}

/// Builds `n` vehicles of which exactly `round(n·penetration)` are electric.
///
/// Every slot draws a Euro class, EV parameters and dynamics whatever its
/// kind, and EV slots are a prefix of one random permutation. With the same
/// streams, the EVs at a lower penetration are therefore a subset of those at
/// a higher one and every vehicle keeps its parameters across levels.
pub fn compose_fleet(
    n: usize,
    penetration: f64,
    dynamics: &DynamicsSampler,
    priors: &EuroPriors,
    streams: &mut FleetStreams,
) -> Result<Vec<VehicleSpec>, FleetError> {
    if !(0.0..=1.0).contains(&penetration) {
        return Err(FleetError::InvalidPenetration(penetration));
    }
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(&mut streams.composition);
    let mut is_ev = vec![false; n];
    for &slot in &slots[..ev_count(n, penetration)] {
        is_ev[slot] = true;
    }
    Ok(is_ev
        .into_iter()
        .enumerate()
        .map(|(i, ev)| {
            let class = sample_euro_class(&mut streams.class, priors);
            let params = sample_ev_params(&mut streams.ev);
            let dynamics = dynamics.sample(&mut streams.jitter);
            VehicleSpec {
                id: VehicleId(i as u64),
                powertrain: if ev {
                    Powertrain::Ev(params)
                } else {
                    Powertrain::Icev(class)
                },
                dynamics,
            }
        })
        .collect())
}

fn resample_powertrain(
    kind: PowertrainKind,
    priors: &EuroPriors,
    streams: &mut FleetStreams,
) -> Powertrain {
    match kind {
        PowertrainKind::Icev => Powertrain::Icev(sample_euro_class(&mut streams.class, priors)),
        PowertrainKind::Ev => Powertrain::Ev(sample_ev_params(&mut streams.ev)),
    }
}

/// Keeps what sensors observe (id, dynamics, powertrain kind) and re-draws
/// the Euro class or EV parameters from their priors.
pub fn degrade_to_partial(
    fleet: &[VehicleSpec],
    priors: &EuroPriors,
    streams: &mut FleetStreams,
) -> Vec<VehicleSpec> {
    fleet
        .iter()
        .map(|spec| VehicleSpec {
            powertrain: resample_powertrain(spec.powertrain.kind(), priors, streams),
            ..spec.clone()
        })
        .collect()
}

/// Builds a fleet from observed (id, kind) pairs alone: powertrain details
/// come from the priors and dynamics from `dynamics`.
pub fn fleet_from_observations(
    observed: &[(VehicleId, PowertrainKind)],
    dynamics: &DynamicsSampler,
    priors: &EuroPriors,
    streams: &mut FleetStreams,
) -> Vec<VehicleSpec> {
    observed
        .iter()
        .map(|&(id, kind)| VehicleSpec {
            id,
            dynamics: dynamics.sample(&mut streams.jitter),
            powertrain: resample_powertrain(kind, priors, streams),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn streams(seed: u64) -> FleetStreams {
        FleetStreams::new(&SeedStreams::new(seed))
    }

    fn sampler() -> DynamicsSampler {
        DynamicsSampler {
            base: DynamicsParams::default(),
            jitter: 0.05,
            speed_cap: 36.11,
        }
    }

    #[test]
    fn table_coefficients() {
        let e4 = EuroClass::Euro4.coefficients();
        assert_eq!(
            (e4.a, e4.b, e4.c, e4.d),
            (3747.3, 155.99, -0.8527, 0.010318)
        );
        assert_eq!((e4.e, e4.f, e4.g, e4.k), (0.0, 0.0, 0.0, 1.0));
        assert_eq!(EuroClass::Euro5.coefficients().b, 128.77);
        assert_eq!(EuroClass::Euro6.coefficients().b, 105.71);
    }

    #[test]
    fn priors_sum_to_one() {
        assert_eq!(EURO_PRIORS.probabilities(), [0.148, 0.218, 0.634]);
        assert!((EURO_PRIORS.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(EuroPriors::new([0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn degenerate_prior_always_euro6() {
        let priors = EuroPriors::new([0.0, 0.0, 1.0]).unwrap();
        let mut rng = StreamRng::seed_from_u64(3);
        assert!((0..1000).all(|_| sample_euro_class(&mut rng, &priors) == EuroClass::Euro6));
    }

    #[test]
    fn euro_class_frequencies_match_priors() {
        let mut rng = StreamRng::seed_from_u64(2024);
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            counts[sample_euro_class(&mut rng, &EURO_PRIORS).index()] += 1;
        }
        for class in EuroClass::ALL {
            let freq = counts[class.index()] as f64 / n as f64;
            assert!(
                (freq - EURO_PRIORS.probability(class)).abs() < 0.005,
                "{class:?} {freq}"
            );
        }
    }

    #[test]
    fn rolling_resistance_endpoints() {
        assert!((rolling_resistance(1) - 0.08253886639676114).abs() < 1e-15);
        assert!((rolling_resistance(4) - 0.09225546558704453).abs() < 1e-15);
    }

    #[test]
    fn ev_params_within_ranges() {
        let mut rng = StreamRng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = sample_ev_params(&mut rng);
            assert!((0.2..=2.2).contains(&p.alpha0));
            assert_eq!(p.alpha1, 5e-4);
            assert!((1..=4).contains(&p.n_pass));
            assert_eq!(p.alpha2, rolling_resistance(p.n_pass));
            assert!(p.alpha3 > 4e-6);
        }
    }

    #[test]
    fn exact_ev_counts() {
        for (p, evs) in [(0.0, 0), (1.0, 100), (0.5, 50)] {
            let fleet = compose_fleet(100, p, &sampler(), &EURO_PRIORS, &mut streams(1)).unwrap();
            let n_ev = fleet
                .iter()
                .filter(|v| v.powertrain.kind() == PowertrainKind::Ev)
                .count();
            assert_eq!(n_ev, evs);
            assert_eq!(fleet.len(), 100);
        }
        assert!(compose_fleet(10, 1.5, &sampler(), &EURO_PRIORS, &mut streams(1)).is_err());
    }

    #[test]
    fn ev_sets_are_nested_across_penetrations() {
        let low = compose_fleet(200, 0.25, &sampler(), &EURO_PRIORS, &mut streams(4)).unwrap();
        let high = compose_fleet(200, 0.75, &sampler(), &EURO_PRIORS, &mut streams(4)).unwrap();
        for (a, b) in low.iter().zip(&high) {
            assert_eq!(a.dynamics, b.dynamics);
            if a.powertrain.kind() == PowertrainKind::Ev {
                assert_eq!(a.powertrain, b.powertrain);
            }
        }
    }

    #[test]
    fn degrade_preserves_observables() {
        let fleet = compose_fleet(300, 0.4, &sampler(), &EURO_PRIORS, &mut streams(5)).unwrap();
        let partial = degrade_to_partial(&fleet, &EURO_PRIORS, &mut streams(99));
        assert_eq!(partial.len(), fleet.len());
        let mut changed = 0;
        for (t, p) in fleet.iter().zip(&partial) {
            assert_eq!(t.id, p.id);
            assert_eq!(t.dynamics, p.dynamics);
            assert_eq!(t.powertrain.kind(), p.powertrain.kind());
            changed += usize::from(t.powertrain != p.powertrain);
        }
        assert!(changed > 100);
        assert!(degrade_to_partial(&[], &EURO_PRIORS, &mut streams(1)).is_empty());
    }

    #[test]
    fn degrade_all_euro6_fleet_follows_priors() {
        let truth: Vec<VehicleSpec> = (0..2000)
            .map(|i| VehicleSpec {
                id: VehicleId(i),
                powertrain: Powertrain::Icev(EuroClass::Euro6),
                dynamics: DynamicsParams::default(),
            })
            .collect();
        let mut euro6 = 0usize;
        let seeds = 25;
        for seed in 0..seeds {
            let partial = degrade_to_partial(&truth, &EURO_PRIORS, &mut streams(seed));
            euro6 += partial
                .iter()
                .filter(|v| v.powertrain == Powertrain::Icev(EuroClass::Euro6))
                .count();
        }
        let share = euro6 as f64 / (2000 * seeds) as f64;
        assert!((share - 0.634).abs() < 0.01, "{share}");
    }

    #[test]
    fn jitter_stays_in_band_and_under_cap() {
        let s = sampler();
        let mut rng = StreamRng::seed_from_u64(8);
        for _ in 0..1000 {
            let v0 = s.sample(&mut rng).desired_speed;
            assert!((33.33 * 0.95 - 1e-9..=36.11).contains(&v0));
        }
    }
}
