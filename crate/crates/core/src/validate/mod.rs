//! Twin-versus-reference validation: summary statistics, accuracy
//! percentages and four divergences between speed histograms.

mod histogram;
mod metrics;
mod report;

pub use histogram::{build_histogram, SpeedHistogram, MAX_BINS, MIN_BINS, SMOOTHING_EPSILON};
pub use metrics::{bhattacharyya, js_divergence, kl_divergence, wasserstein1, Divergences};
pub use report::{accuracy, trip_speeds, validation_report, SummaryStats, ValidationReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidateError {
    #[error("cannot build a histogram from an empty sample")]
    EmptySample,
    #[error("histograms do not share bin edges")]
    MismatchedBins,
    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),
    #[error("reference probability is zero where the other histogram has mass")]
    ZeroReferenceMass,
    #[error("{0} output has no completed trips")]
    NoCompletedTrips(&'static str),
}
