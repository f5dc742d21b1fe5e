//! Motorway digital-twin toolkit.
//!
//! `twinway` simulates mixed ICEV/EV traffic on a multi-lane motorway
//! corridor, prices every completed trip with average-speed cost functions
//! (CO₂ per km for combustion vehicles, consumption per km for electric
//! ones) and validates twin runs against a full-information reference run.
//!
//! The three run modes are:
//!
//! - **physical**: the full-information run that stands in for the real
//!   system. Its sensor observations (loop detectors, probes, entry
//!   classification) are derived from it with configurable noise.
//! - **CIDT**: a complete-information replay of the physical run.
//! - **PIDT**: a partial-information twin that rebuilds demand from the
//!   observations and re-samples every vehicle's unobservable parameters.
//!
//! Module map:
//!
//! - [`microsim`]: IDM car following, MOBIL lane changes, ramp demand, the
//!   time-stepped world and virtual detectors.
//! - [`fleet`]: Euro-class and EV parameter sampling, fleet composition.
//! - [`powertrain`]: per-km cost functions, per-trip costs and fleet totals.
//! - [`validate`]: summary statistics, accuracy and the four histogram
//!   divergences.
//! - [`twin`]: the physical / CIDT / PIDT protocol and penetration sweeps.
//! - [`config`], [`io`], [`cli`]: configuration files, CSV/JSON artifacts and
//!   the `twinway` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod fleet;
pub mod io;
pub mod microsim;
pub mod powertrain;
pub mod rng;
pub mod twin;
pub mod validate;

pub use config::{InfoMode, ScenarioConfig};
pub use error::{Error, Result};
pub use fleet::{EuroClass, EvParams, Powertrain, PowertrainKind, VehicleId, VehicleSpec};
pub use microsim::{Corridor, DynamicsParams, SimOutput, TripTrace};
pub use validate::{SpeedHistogram, ValidationReport};
