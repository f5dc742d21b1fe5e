//! Penetration sweeps and divergence-versus-volume tables.
//!
//! Every (level or interval, seed) cell is an independent physical → CIDT →
//! PIDT chain and runs on the rayon pool; results are joined in grid order,
//! so output does not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_cidt, run_physical, run_pidt, TwinError};
use crate::config::{InfoMode, ScenarioConfig};
use crate::powertrain::CostAggregate;
use crate::validate::{build_histogram, trip_speeds, Divergences};

/// Caps the number of worker threads used by sweeps.
pub const THREADS_ENV: &str = "TWINWAY_THREADS";

/// Thread cap from `TWINWAY_THREADS`; `None` when unset, empty, zero or
/// unparsable (rayon's default then applies).
pub fn sweep_thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn in_pool<T: Send>(job: impl FnOnce() -> T + Send) -> Result<T, TwinError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = sweep_thread_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| TwinError::ThreadPool(e.to_string()))?;
    Ok(pool.install(job))
}

/// Signed relative error of `value` against `reference`; `None` when the
/// reference is zero.
pub fn relative_error(value: f64, reference: f64) -> Option<f64> {
    (reference != 0.0).then(|| (value - reference) / reference)
}

/// Cost totals of the three modes for one (level, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub level: f64,
    pub seed: u64,
    pub physical: CostAggregate,
    pub cidt: CostAggregate,
    pub pidt: CostAggregate,
}

/// Seed-averaged totals of one mode at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeTotals {
    pub mode: InfoMode,
    pub co2_g: f64,
    pub energy: f64,
    /// Signed relative error against physical; `None` for physical itself
    /// or when the physical total is zero.
    pub co2_error: Option<f64>,
    pub energy_error: Option<f64>,
}

/// Per-level seed means. Errors are relative errors of the means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub level: f64,
    pub physical_co2: f64,
    pub cidt_co2: f64,
    pub pidt_co2: f64,
    pub physical_energy: f64,
    pub cidt_energy: f64,
    pub pidt_energy: f64,
    pub cidt_co2_error: Option<f64>,
    pub pidt_co2_error: Option<f64>,
    pub cidt_energy_error: Option<f64>,
    pub pidt_energy_error: Option<f64>,
}

impl SweepRow {
    fn from_runs(level: f64, runs: &[&SweepRun]) -> Self {
        let n = runs.len() as f64;
        let mean = |f: &dyn Fn(&SweepRun) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
        let physical_co2 = mean(&|r| r.physical.total_co2_g);
        let cidt_co2 = mean(&|r| r.cidt.total_co2_g);
        let pidt_co2 = mean(&|r| r.pidt.total_co2_g);
        let physical_energy = mean(&|r| r.physical.total_energy);
        let cidt_energy = mean(&|r| r.cidt.total_energy);
        let pidt_energy = mean(&|r| r.pidt.total_energy);
        Self {
            level,
            physical_co2,
            cidt_co2,
            pidt_co2,
            physical_energy,
            cidt_energy,
            pidt_energy,
            cidt_co2_error: relative_error(cidt_co2, physical_co2),
            pidt_co2_error: relative_error(pidt_co2, physical_co2),
            cidt_energy_error: relative_error(cidt_energy, physical_energy),
            pidt_energy_error: relative_error(pidt_energy, physical_energy),
        }
    }

    /// The row split by mode: physical, CIDT, PIDT.
    pub fn by_mode(&self) -> [ModeTotals; 3] {
        [
            ModeTotals {
                mode: InfoMode::Physical,
                co2_g: self.physical_co2,
                energy: self.physical_energy,
                co2_error: None,
                energy_error: None,
            },
            ModeTotals {
                mode: InfoMode::Cidt,
                co2_g: self.cidt_co2,
                energy: self.cidt_energy,
                co2_error: self.cidt_co2_error,
                energy_error: self.cidt_energy_error,
            },
            ModeTotals {
                mode: InfoMode::Pidt,
                co2_g: self.pidt_co2,
                energy: self.pidt_energy,
                co2_error: self.pidt_co2_error,
                energy_error: self.pidt_energy_error,
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub levels: Vec<f64>,
    pub seeds: Vec<u64>,
    /// One row per level, in the order given.
    pub rows: Vec<SweepRow>,
    /// Level-major, seed-minor.
    pub runs: Vec<SweepRun>,
}

fn sweep_cell(config: &ScenarioConfig, level: f64, seed: u64) -> Result<SweepRun, TwinError> {
    let mut cfg = config.clone();
    cfg.scenario.ev_penetration = level;
    let gt = run_physical(&cfg, seed)?;
    let cidt = run_cidt(&gt, &cfg)?;
    let pidt = run_pidt(&gt.observations, &cfg, seed)?;
    Ok(SweepRun {
        level,
        seed,
        physical: gt.costs,
        cidt: cidt.costs,
        pidt: pidt.costs,
    })
}

/// Physical, CIDT and PIDT totals for every level × seed.
pub fn penetration_sweep(
    config: &ScenarioConfig,
    levels: &[f64],
    seeds: &[u64],
) -> Result<SweepReport, TwinError> {
    if levels.is_empty() {
        return Err(TwinError::EmptySweep("penetration level"));
    }
    if seeds.is_empty() {
        return Err(TwinError::EmptySweep("seed"));
    }
    let cells: Vec<(f64, u64)> = levels
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();
    let runs = in_pool(|| {
        cells
            .par_iter()
            .map(|&(level, seed)| sweep_cell(config, level, seed))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let rows = runs
        .chunks(seeds.len())
        .zip(levels)
        .map(|(chunk, &level)| SweepRow::from_runs(level, &chunk.iter().collect::<Vec<_>>()))
        .collect();
    Ok(SweepReport {
        levels: levels.to_vec(),
        seeds: seeds.to_vec(),
        rows,
        runs,
    })
}

/// Seed-averaged PIDT-versus-physical divergences of trip-speed histograms
/// for one emission interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub emission_interval_s: f64,
    pub kl: f64,
    pub js: f64,
    pub wasserstein: f64,
    pub bhattacharyya: f64,
}

fn divergence_cell(
    config: &ScenarioConfig,
    interval: f64,
    seed: u64,
) -> Result<Divergences, TwinError> {
    let mut cfg = config.clone();
    cfg.scenario.emission_interval = interval;
    let gt = run_physical(&cfg, seed)?;
    let pidt = run_pidt(&gt.observations, &cfg, seed)?;
    let (reference, twin) = build_histogram(
        &trip_speeds(&gt.output.traces),
        &trip_speeds(&pidt.output.traces),
    )?;
    Ok(Divergences::between(&reference, &twin)?)
}

/// One row per interval, in the order given.
pub fn divergence_by_interval(
    config: &ScenarioConfig,
    intervals: &[f64],
    seeds: &[u64],
) -> Result<Vec<DivergenceRow>, TwinError> {
    if seeds.is_empty() {
        return Err(TwinError::EmptySweep("seed"));
    }
    let cells: Vec<(f64, u64)> = intervals
        .iter()
        .flat_map(|&i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let all = in_pool(|| {
        cells
            .par_iter()
            .map(|&(interval, seed)| divergence_cell(config, interval, seed))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let n = seeds.len() as f64;
    Ok(all
        .chunks(seeds.len())
        .zip(intervals)
        .map(|(chunk, &interval)| DivergenceRow {
            emission_interval_s: interval,
            kl: chunk.iter().map(|d| d.kl).sum::<f64>() / n,
            js: chunk.iter().map(|d| d.js).sum::<f64>() / n,
            wasserstein: chunk.iter().map(|d| d.wasserstein).sum::<f64>() / n,
            bhattacharyya: chunk.iter().map(|d| d.bhattacharyya).sum::<f64>() / n,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.scenario.horizon = 300.0;
        c.scenario.emission_interval = 40.0;
        c
    }

    #[test]
    fn extreme_levels_zero_one_column() {
        let r = penetration_sweep(&small(), &[0.0, 1.0], &[1, 2]).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.runs.len(), 4);
        let (zero, one) = (&r.rows[0], &r.rows[1]);
        assert_eq!(
            [zero.physical_energy, zero.cidt_energy, zero.pidt_energy],
            [0.0; 3]
        );
        assert_eq!([one.physical_co2, one.cidt_co2, one.pidt_co2], [0.0; 3]);
        assert_eq!(zero.cidt_co2_error, Some(0.0));
        assert_eq!(zero.pidt_energy_error, None);
    }

    #[test]
    fn sweep_is_independent_of_thread_count() {
        let c = small();
        let a = penetration_sweep(&c, &[0.5], &[4, 5, 6]).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool
            .install(|| penetration_sweep(&c, &[0.5], &[4, 5, 6]))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_grids_are_rejected() {
        assert!(penetration_sweep(&small(), &[], &[1]).is_err());
        assert!(penetration_sweep(&small(), &[0.5], &[]).is_err());
        assert!(penetration_sweep(&small(), &[1.5], &[1]).is_err());
    }

    #[test]
    fn divergence_rows_follow_intervals() {
        let rows = divergence_by_interval(&small(), &[100.0, 40.0], &[1, 2]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].emission_interval_s, 100.0);
        for r in rows {
            assert!(r.js >= 0.0 && r.js <= std::f64::consts::LN_2);
            assert!(r.wasserstein >= 0.0 && r.kl >= 0.0);
        }
    }

    #[test]
    fn relative_error_handles_zero_reference() {
        assert_eq!(relative_error(3.0, 2.0), Some(0.5));
        assert_eq!(relative_error(1.0, 2.0), Some(-0.5));
        assert_eq!(relative_error(3.0, 0.0), None);
    }
}
