//! CSV readers and writers for traces, detector readings, fleets, costs,
//! sweep results and divergence tables.
//!
//! Floats are written in shortest round-trip form, so every reader here is
//! an exact inverse of its writer. Row numbers in errors count data rows
//! from 1, excluding the header.

use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::IoError;
use crate::fleet::{EuroClass, EvParams, Powertrain, PowertrainKind, VehicleId, VehicleSpec};
use crate::microsim::{DetectorReading, DynamicsParams, TraceSample, TripTrace};
use crate::powertrain::CostRow;
use crate::twin::{DivergenceRow, SweepReport};

pub const TRACE_HEADER: [&str; 5] = ["vehicle_id", "t_s", "position_m", "lane", "speed_mps"];
pub const DETECTOR_HEADER: [&str; 5] = [
    "station_m",
    "window_start_s",
    "window_len_s",
    "count",
    "mean_speed_mps",
];

fn write_rows<W: Write, T: Serialize>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| IoError::Csv(e.to_string()))?;
    Ok(())
}

fn read_rows<R: Read, T: DeserializeOwned>(input: R, header: &[&str]) -> Result<Vec<T>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let found = r.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(IoError::Header {
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| IoError::row(i + 1, e.to_string())))
        .collect()
}

fn open(path: &Path) -> Result<std::fs::File, IoError> {
    std::fs::File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

// ---- traces ----

#[derive(Serialize, Deserialize)]
struct TraceRow {
    vehicle_id: u64,
    t_s: f64,
    position_m: f64,
    lane: usize,
    speed_mps: f64,
}

pub fn write_traces<W: Write>(out: W, traces: &[TripTrace]) -> Result<(), IoError> {
    let rows = traces.iter().flat_map(|t| {
        t.samples.iter().map(move |s| TraceRow {
            vehicle_id: t.vehicle_id.0,
            t_s: s.t,
            position_m: s.position,
            lane: s.lane,
            speed_mps: s.speed,
        })
    });
    write_rows(out, &TRACE_HEADER, rows)
}

/// Groups consecutive rows with the same vehicle id into trips.
pub fn read_traces<R: Read>(input: R) -> Result<Vec<TripTrace>, IoError> {
    let rows: Vec<TraceRow> = read_rows(input, &TRACE_HEADER)?;
    let mut traces = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let id = rows[start].vehicle_id;
        let end = rows[start..]
            .iter()
            .position(|r| r.vehicle_id != id)
            .map_or(rows.len(), |k| start + k);
        let samples = rows[start..end]
            .iter()
            .map(|r| TraceSample {
                t: r.t_s,
                position: r.position_m,
                lane: r.lane,
                speed: r.speed_mps,
            })
            .collect();
        let trace = TripTrace::from_samples(VehicleId(id), samples).ok_or_else(|| {
            IoError::row(
                start + 1,
                format!("vehicle {id} has no trip of positive duration"),
            )
        })?;
        traces.push(trace);
        start = end;
    }
    Ok(traces)
}

pub fn read_traces_file(path: &Path) -> Result<Vec<TripTrace>, IoError> {
    read_traces(open(path)?)
}

// ---- detector readings ----

#[derive(Serialize, Deserialize)]
struct DetectorRow {
    station_m: f64,
    window_start_s: f64,
    window_len_s: f64,
    count: i64,
    mean_speed_mps: Option<f64>,
}

pub fn write_detector_readings<W: Write>(
    out: W,
    readings: &[DetectorReading],
) -> Result<(), IoError> {
    let rows = readings.iter().map(|r| DetectorRow {
        station_m: r.station,
        window_start_s: r.window_start,
        window_len_s: r.window_len,
        count: r.count as i64,
        mean_speed_mps: r.mean_speed,
    });
    write_rows(out, &DETECTOR_HEADER, rows)
}

fn detector_reading(row: DetectorRow) -> Result<DetectorReading, String> {
    let finite = [row.station_m, row.window_start_s, row.window_len_s]
        .iter()
        .chain(row.mean_speed_mps.iter())
        .all(|x| x.is_finite());
    if !finite {
        return Err("non-finite value".into());
    }
    if row.count < 0 {
        return Err(format!("negative count {}", row.count));
    }
    if row.station_m < 0.0 || row.window_start_s < 0.0 {
        return Err("station and window start must be non-negative".into());
    }
    if row.window_len_s <= 0.0 {
        return Err("window length must be positive".into());
    }
    let mean_speed = match (row.count, row.mean_speed_mps) {
        (0, _) => None,
        (_, None) => return Err("non-zero count without a mean speed".into()),
        (_, Some(v)) if v < 0.0 => return Err(format!("negative mean speed {v}")),
        (_, Some(v)) => Some(v),
    };
    Ok(DetectorReading {
        station: row.station_m,
        window_start: row.window_start_s,
        window_len: row.window_len_s,
        count: row.count as u64,
        mean_speed,
    })
}

/// Reads and validates detector readings. Rows with a zero count have no
/// mean speed, whatever the file says.
pub fn read_detector_readings<R: Read>(input: R) -> Result<Vec<DetectorReading>, IoError> {
    let rows: Vec<DetectorRow> = read_rows(input, &DETECTOR_HEADER)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| detector_reading(row).map_err(|m| IoError::row(i + 1, m)))
        .collect()
}

pub fn ingest_detector_csv(path: &Path) -> Result<Vec<DetectorReading>, IoError> {
    read_detector_readings(open(path)?)
}

// ---- fleet ----

pub const FLEET_HEADER: [&str; 9] = [
    "id",
    "kind",
    "euro_class",
    "alpha0",
    "alpha1",
    "alpha2",
    "alpha3",
    "n_pass",
    "v0",
];

#[derive(Serialize, Deserialize)]
struct FleetRow {
    id: u64,
    kind: PowertrainKind,
    euro_class: Option<EuroClass>,
    alpha0: Option<f64>,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    alpha3: Option<f64>,
    n_pass: Option<u8>,
    v0: f64,
}

pub fn write_fleet<W: Write>(out: W, fleet: &[VehicleSpec]) -> Result<(), IoError> {
    let rows = fleet.iter().map(|s| {
        let (class, ev) = match s.powertrain {
            Powertrain::Icev(c) => (Some(c), None),
            Powertrain::Ev(p) => (None, Some(p)),
        };
        FleetRow {
            id: s.id.0,
            kind: s.powertrain.kind(),
            euro_class: class,
            alpha0: ev.map(|p| p.alpha0),
            alpha1: ev.map(|p| p.alpha1),
            alpha2: ev.map(|p| p.alpha2),
            alpha3: ev.map(|p| p.alpha3),
            n_pass: ev.map(|p| p.n_pass),
            v0: s.dynamics.desired_speed,
        }
    });
    write_rows(out, &FLEET_HEADER, rows)
}

/// Reads a fleet; every dynamics parameter other than v0 comes from `base`.
pub fn read_fleet<R: Read>(input: R, base: &DynamicsParams) -> Result<Vec<VehicleSpec>, IoError> {
    let rows: Vec<FleetRow> = read_rows(input, &FLEET_HEADER)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let powertrain = match r.kind {
                PowertrainKind::Icev => Powertrain::Icev(
                    r.euro_class
                        .ok_or_else(|| IoError::row(i + 1, "ICEV row without euro_class"))?,
                ),
                PowertrainKind::Ev => match (r.alpha0, r.alpha1, r.alpha2, r.alpha3, r.n_pass) {
                    (Some(alpha0), Some(alpha1), Some(alpha2), Some(alpha3), Some(n_pass)) => {
                        Powertrain::Ev(EvParams {
                            alpha0,
                            alpha1,
                            alpha2,
                            alpha3,
                            n_pass,
                        })
                    }
                    _ => {
                        return Err(IoError::row(
                            i + 1,
                            "EV row needs alpha0..alpha3 and n_pass",
                        ))
                    }
                },
            };
            if !(r.v0.is_finite() && r.v0 > 0.0) {
                return Err(IoError::row(i + 1, "v0 must be positive"));
            }
            Ok(VehicleSpec {
                id: VehicleId(r.id),
                powertrain,
                dynamics: DynamicsParams {
                    desired_speed: r.v0,
                    ..*base
                },
            })
        })
        .collect()
}

// ---- costs ----

pub const COST_HEADER: [&str; 6] = [
    "vehicle_id",
    "kind",
    "class_or_alpha_summary",
    "trip_km",
    "mean_speed_mps",
    "cost",
];

#[derive(Serialize, Deserialize)]
struct CostCsvRow {
    vehicle_id: u64,
    kind: PowertrainKind,
    class_or_alpha_summary: String,
    trip_km: f64,
    mean_speed_mps: f64,
    cost: f64,
}

/// `cost` is g CO₂ for ICEV rows and energy for EV rows.
pub fn write_costs<W: Write>(out: W, rows: &[CostRow]) -> Result<(), IoError> {
    let rows = rows.iter().map(|r| CostCsvRow {
        vehicle_id: r.vehicle_id.0,
        kind: r.kind,
        class_or_alpha_summary: r.class_or_alpha_summary.clone(),
        trip_km: r.trip_km,
        mean_speed_mps: r.mean_speed,
        cost: r.cost,
    });
    write_rows(out, &COST_HEADER, rows)
}

pub fn read_costs<R: Read>(input: R) -> Result<Vec<CostRow>, IoError> {
    let rows: Vec<CostCsvRow> = read_rows(input, &COST_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|r| CostRow {
            vehicle_id: VehicleId(r.vehicle_id),
            kind: r.kind,
            class_or_alpha_summary: r.class_or_alpha_summary,
            trip_km: r.trip_km,
            mean_speed: r.mean_speed_mps,
            cost: r.cost,
        })
        .collect())
}

// ---- divergence table ----

pub const DIVERGENCE_HEADER: [&str; 5] = [
    "emission_interval_s",
    "kl",
    "js",
    "wasserstein",
    "bhattacharyya",
];

pub fn write_divergences<W: Write>(out: W, rows: &[DivergenceRow]) -> Result<(), IoError> {
    write_rows(out, &DIVERGENCE_HEADER, rows)
}

pub fn read_divergences<R: Read>(input: R) -> Result<Vec<DivergenceRow>, IoError> {
    read_rows(input, &DIVERGENCE_HEADER)
}

// ---- sweep ----

pub const SWEEP_HEADER: [&str; 6] = [
    "level",
    "mode",
    "co2_g",
    "energy",
    "co2_error",
    "energy_error",
];

/// One row per level × mode (physical, cidt, pidt).
pub fn write_sweep<W: Write>(out: W, report: &SweepReport) -> Result<(), IoError> {
    #[derive(Serialize)]
    struct Row {
        level: f64,
        mode: &'static str,
        co2_g: f64,
        energy: f64,
        co2_error: Option<f64>,
        energy_error: Option<f64>,
    }
    let rows = report.rows.iter().flat_map(|row| {
        row.by_mode().map(|m| Row {
            level: row.level,
            mode: m.mode.name(),
            co2_g: m.co2_g,
            energy: m.energy,
            co2_error: m.co2_error,
            energy_error: m.energy_error,
        })
    });
    write_rows(out, &SWEEP_HEADER, rows)
}
