//! Scenario configuration.
//!
//! Configs are TOML documents. Every section and key is optional and falls
//! back to the defaults below; unknown keys are rejected. A document that
//! only sets `seed` describes the default 7 km, four-lane corridor with
//! 100 s insertion batches.
//!
//! ```toml
//! seed = 42
//!
//! [scenario]
//! emission_interval = 40.0
//! ev_penetration = 0.25
//! info_mode = "pidt"
//!
//! [noise]
//! count_drop_rate = 0.05
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::InvalidParameter;
use crate::fleet::DynamicsSampler;
use crate::microsim::{Corridor, DynamicsParams, SimParams, STANDARD_EMISSION_INTERVALS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config value: {0}")]
    Invalid(#[from] InvalidParameter),
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
}

/// Which knowledge a run receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InfoMode {
    /// Full-information ground-truth run.
    #[default]
    Physical,
    /// Complete-information twin: exact fleet and demand.
    Cidt,
    /// Partial-information twin: demand and powertrain kinds from sensors only.
    Pidt,
}

impl InfoMode {
    pub fn name(self) -> &'static str {
        match self {
            InfoMode::Physical => "physical",
            InfoMode::Cidt => "cidt",
            InfoMode::Pidt => "pidt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    /// Insertions are scheduled in `[0, horizon)`, seconds.
    pub horizon: f64,
    /// Extra simulated time after the horizon for vehicles to finish, seconds.
    pub drain: f64,
    /// Seconds between insertion batches.
    pub emission_interval: f64,
    /// Vehicles per batch.
    pub batch_size: u32,
    pub ev_penetration: f64,
    pub info_mode: InfoMode,
    /// Half-width of the uniform desired-speed spread, as a fraction of v0.
    pub v0_jitter: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            horizon: 1800.0,
            drain: 900.0,
            emission_interval: 100.0,
            batch_size: 8,
            ev_penetration: 0.5,
            info_mode: InfoMode::Physical,
            v0_jitter: 0.05,
        }
    }
}

/// Sensor imperfections applied to the physical run's observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseLevels {
    /// Standard deviation of speed measurement noise, m/s.
    pub speed_sigma: f64,
    /// Probability that a detector, probe or classification event is lost.
    pub count_drop_rate: f64,
}

impl Default for NoiseLevels {
    fn default() -> Self {
        Self {
            speed_sigma: 0.5,
            count_drop_rate: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// EV penetration levels.
    pub levels: Vec<f64>,
    /// Replications per level; seeds are `seed, seed+1, …`.
    pub seeds: u32,
    /// Emission intervals for the divergence-versus-volume table, seconds.
    pub intervals: Vec<f64>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            levels: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            seeds: 20,
            intervals: STANDARD_EMISSION_INTERVALS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub scenario: ScenarioSection,
    pub corridor: Corridor,
    pub dynamics: DynamicsParams,
    pub sim: SimParams,
    pub noise: NoiseLevels,
    pub sweep: SweepSettings,
}

fn check(ok: bool, key: &str, reason: &str) -> Result<(), InvalidParameter> {
    if ok {
        Ok(())
    } else {
        Err(InvalidParameter::new(key, reason))
    }
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), InvalidParameter> {
        let s = &self.scenario;
        check(
            s.horizon.is_finite() && s.horizon >= 0.0,
            "scenario.horizon",
            "must be non-negative",
        )?;
        check(
            s.drain.is_finite() && s.drain >= 0.0,
            "scenario.drain",
            "must be non-negative",
        )?;
        check(
            s.emission_interval.is_finite() && s.emission_interval > 0.0,
            "scenario.emission_interval",
            "must be positive",
        )?;
        check(
            s.batch_size >= 1,
            "scenario.batch_size",
            "must be at least 1",
        )?;
        check(
            unit_interval(s.ev_penetration),
            "scenario.ev_penetration",
            "must lie in [0, 1]",
        )?;
        check(
            (0.0..1.0).contains(&s.v0_jitter),
            "scenario.v0_jitter",
            "must lie in [0, 1)",
        )?;
        self.corridor.validate().map_err(|e| e.within("corridor"))?;
        self.dynamics
            .validate(self.corridor.speed_limit)
            .map_err(|e| e.within("dynamics"))?;
        self.sim.validate().map_err(|e| e.within("sim"))?;
        check(
            self.noise.speed_sigma.is_finite() && self.noise.speed_sigma >= 0.0,
            "noise.speed_sigma",
            "must be non-negative",
        )?;
        check(
            unit_interval(self.noise.count_drop_rate),
            "noise.count_drop_rate",
            "must lie in [0, 1]",
        )?;
        check(
            !self.sweep.levels.is_empty(),
            "sweep.levels",
            "must not be empty",
        )?;
        for (i, level) in self.sweep.levels.iter().enumerate() {
            check(
                unit_interval(*level),
                &format!("sweep.levels[{i}]"),
                "must lie in [0, 1]",
            )?;
        }
        check(self.sweep.seeds >= 1, "sweep.seeds", "must be at least 1")?;
        for (i, interval) in self.sweep.intervals.iter().enumerate() {
            check(
                interval.is_finite() && *interval > 0.0,
                &format!("sweep.intervals[{i}]"),
                "must be positive",
            )?;
        }
        Ok(())
    }

    pub fn dynamics_sampler(&self) -> DynamicsSampler {
        DynamicsSampler {
            base: self.dynamics,
            jitter: self.scenario.v0_jitter,
            speed_cap: self.corridor.speed_limit,
        }
    }

    /// Sweep seeds `seed, seed + 1, …`.
    pub fn sweep_seeds(&self) -> Vec<u64> {
        (0..u64::from(self.sweep.seeds))
            .map(|i| self.seed.wrapping_add(i))
            .collect()
    }

    /// The resolved config as a TOML document that parses back to `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_only_document_gets_defaults() {
        let c = parse_config("seed = 7").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.corridor.length, 7000.0);
        assert_eq!(c.corridor.lane_count, 4);
        assert_eq!(c.scenario.emission_interval, 100.0);
        assert_eq!(c.sweep.intervals, vec![10.0, 40.0, 80.0, 100.0]);
        assert_eq!(
            c,
            ScenarioConfig {
                seed: 7,
                ..ScenarioConfig::default()
            }
        );
    }

    #[test]
    fn out_of_range_penetration_names_the_key() {
        let err = parse_config("seed = 1\n[scenario]\nev_penetration = 1.5\n").unwrap_err();
        match err {
            ConfigError::Invalid(p) => assert_eq!(p.key, "scenario.ev_penetration"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let err = parse_config("seed = 1\n[scenario]\nhorizn = 5.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ConfigError::Parse(_)));
        assert!(msg.contains("horizn"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn nested_errors_carry_section_path() {
        let err = parse_config("[dynamics]\npoliteness = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("dynamics.politeness"));
        let err = parse_config(
            "[[corridor.ramps]]\nposition = 9000.0\nkind = \"on\"\ndemand_share = 0.1\n",
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("corridor.ramps[0].position"),
            "{err}"
        );
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut c = ScenarioConfig {
            seed: 99,
            ..ScenarioConfig::default()
        };
        c.scenario.ev_penetration = 0.3;
        c.scenario.info_mode = InfoMode::Pidt;
        c.noise.speed_sigma = 0.123456789;
        let text = c.to_toml();
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn sweep_seeds_are_consecutive() {
        let c = parse_config("seed = 10\n[sweep]\nseeds = 3\n").unwrap();
        assert_eq!(c.sweep_seeds(), vec![10, 11, 12]);
    }
}
