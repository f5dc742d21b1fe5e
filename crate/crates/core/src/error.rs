use thiserror::Error;

use crate::config::ConfigError;
use crate::fleet::FleetError;
use crate::io::IoError;
use crate::microsim::SimError;
use crate::powertrain::PowertrainError;
use crate::twin::TwinError;
use crate::validate::ValidateError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error, one variant per module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Fleet(#[from] FleetError),
    #[error(transparent)]
    Powertrain(#[from] PowertrainError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error(transparent)]
    Twin(#[from] TwinError),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// A parameter that violates its documented range, named by key path.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{key}: {reason}")]
pub struct InvalidParameter {
    pub key: String,
    pub reason: String,
}

impl InvalidParameter {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Prefix the key with a section name, e.g. `min_gap` -> `dynamics.min_gap`.
    pub fn within(mut self, section: &str) -> Self {
        self.key = format!("{section}.{}", self.key);
        self
    }
}
