//! Writing a run's artifacts plus a manifest that pins them down.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::csv::{
    write_costs, write_detector_readings, write_divergences, write_fleet, write_sweep, write_traces,
};
use super::IoError;
use crate::config::ScenarioConfig;
use crate::fleet::VehicleSpec;
use crate::microsim::{DetectorReading, TripTrace};
use crate::powertrain::CostRow;
use crate::rng::SeedStreams;
use crate::twin::{DivergenceRow, SweepReport, PIDT_STREAM};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to regenerate the outputs it lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Seeds of every named stream derived from `seed`, including the
    /// partial-information child streams (`pidt/…`).
    pub stream_seeds: BTreeMap<String, u64>,
    /// The resolved configuration, as a config document.
    pub config: Option<String>,
    pub outputs: Vec<OutputEntry>,
}

/// Artifacts rendered in memory, ready to be written together.
///
/// Rendering happens when an artifact is added, so a bundle that was built
/// successfully can only fail to emit on file-system errors.
#[derive(Debug, Clone, Default)]
pub struct ReportBundle {
    command: String,
    config: Option<ScenarioConfig>,
    files: Vec<(String, Vec<u8>)>,
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> Result<(), IoError>) -> Result<Vec<u8>, IoError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

impl ReportBundle {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn with_config(mut self, config: &ScenarioConfig) -> Self {
        self.config = Some(config.clone());
        self
    }

    pub fn file_names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(name, _)| name.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    fn push(&mut self, name: &str, bytes: Vec<u8>) -> &mut Self {
        match self.files.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = bytes,
            None => self.files.push((name.to_string(), bytes)),
        }
        self
    }

    pub fn traces(&mut self, name: &str, traces: &[TripTrace]) -> Result<&mut Self, IoError> {
        let bytes = render(|b| write_traces(b, traces))?;
        Ok(self.push(name, bytes))
    }

    pub fn detectors(
        &mut self,
        name: &str,
        readings: &[DetectorReading],
    ) -> Result<&mut Self, IoError> {
        let bytes = render(|b| write_detector_readings(b, readings))?;
        Ok(self.push(name, bytes))
    }

    pub fn fleet(&mut self, name: &str, fleet: &[VehicleSpec]) -> Result<&mut Self, IoError> {
        let bytes = render(|b| write_fleet(b, fleet))?;
        Ok(self.push(name, bytes))
    }

    pub fn costs(&mut self, name: &str, rows: &[CostRow]) -> Result<&mut Self, IoError> {
        let bytes = render(|b| write_costs(b, rows))?;
        Ok(self.push(name, bytes))
    }

    pub fn divergences(
        &mut self,
        name: &str,
        rows: &[DivergenceRow],
    ) -> Result<&mut Self, IoError> {
        let bytes = render(|b| write_divergences(b, rows))?;
        Ok(self.push(name, bytes))
    }

    pub fn sweep_csv(&mut self, name: &str, report: &SweepReport) -> Result<&mut Self, IoError> {
        let bytes = render(|b| write_sweep(b, report))?;
        Ok(self.push(name, bytes))
    }

    pub fn json<T: Serialize + ?Sized>(
        &mut self,
        name: &str,
        value: &T,
    ) -> Result<&mut Self, IoError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(self.push(name, bytes))
    }

    pub fn manifest(&self) -> RunManifest {
        let seed = self.config.as_ref().map(|c| c.seed);
        let mut stream_seeds = BTreeMap::new();
        if let Some(seed) = seed {
            let streams = SeedStreams::new(seed);
            stream_seeds.extend(streams.manifest());
            for (label, s) in streams.child(PIDT_STREAM).manifest() {
                stream_seeds.insert(format!("{PIDT_STREAM}/{label}"), s);
            }
        }
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.clone(),
            seed,
            stream_seeds,
            config: self.config.as_ref().map(ScenarioConfig::to_toml),
            outputs: self
                .files
                .iter()
                .map(|(name, bytes)| OutputEntry {
                    file: name.clone(),
                    sha256: sha256_hex(bytes),
                    bytes: bytes.len() as u64,
                })
                .collect(),
        }
    }
}

/// Writes every artifact and `manifest.json` into `dir`, creating it if
/// needed. The directory is probed first, so an unwritable target fails
/// before any artifact is written.
pub fn emit_reports(bundle: &ReportBundle, dir: &Path) -> Result<RunManifest, IoError> {
    let unwritable = |source| IoError::Unwritable {
        path: dir.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(unwritable)?;
    let probe = dir.join(".twinway-write-check");
    fs::write(&probe, b"").map_err(unwritable)?;
    fs::remove_file(&probe).map_err(unwritable)?;

    let write = |name: &str, bytes: &[u8]| {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })
    };
    for (name, bytes) in &bundle.files {
        write(name, bytes)?;
    }
    let manifest = bundle.manifest();
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write(MANIFEST_FILE, &json)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn empty_bundle_lists_no_outputs() {
        let m = ReportBundle::new("sweep").manifest();
        assert!(m.outputs.is_empty());
        assert_eq!(m.seed, None);
    }

    #[test]
    fn manifest_records_stream_seeds() {
        let config = ScenarioConfig {
            seed: 9,
            ..ScenarioConfig::default()
        };
        let m = ReportBundle::new("simulate")
            .with_config(&config)
            .manifest();
        assert_eq!(m.seed, Some(9));
        assert_eq!(
            m.stream_seeds["demand"],
            SeedStreams::new(9).seed(crate::rng::Stream::Demand)
        );
        assert!(m.stream_seeds.contains_key("pidt/routing"));
        let parsed = crate::config::parse_config(m.config.as_deref().unwrap()).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn re_adding_a_name_replaces_it() {
        let mut b = ReportBundle::new("x");
        b.json("a.json", &1).unwrap();
        b.json("a.json", &2).unwrap();
        assert_eq!(b.file_names().collect::<Vec<_>>(), vec!["a.json"]);
    }
}
