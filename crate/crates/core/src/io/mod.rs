//! File formats: CSV tables, JSON reports and the run manifest.

mod csv;
mod emit;

pub use self::csv::{
    ingest_detector_csv, read_costs, read_detector_readings, read_divergences, read_fleet,
    read_traces, read_traces_file, write_costs, write_detector_readings, write_divergences,
    write_fleet, write_sweep, write_traces, COST_HEADER, DETECTOR_HEADER, DIVERGENCE_HEADER,
    FLEET_HEADER, SWEEP_HEADER, TRACE_HEADER,
};
pub use emit::{emit_reports, sha256_hex, OutputEntry, ReportBundle, RunManifest, MANIFEST_FILE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("unexpected header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("output directory {path} is not writable: {source}")]
    Unwritable {
        path: String,
        source: std::io::Error,
    },
}

impl IoError {
    pub(crate) fn row(row: usize, message: impl Into<String>) -> Self {
        IoError::Row {
            row,
            message: message.into(),
        }
    }
}

impl From<::csv::Error> for IoError {
    fn from(e: ::csv::Error) -> Self {
        IoError::Csv(e.to_string())
    }
}
