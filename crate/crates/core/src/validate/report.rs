use serde::{Deserialize, Serialize};

use super::metrics::Divergences;
use super::{build_histogram, ValidateError};
use crate::microsim::{SimOutput, TripTrace};

pub const ACCURACY_DEFINITION: &str = "100*(1-|twin-reference|/reference)";
pub const BINNING: &str = "shared uniform bins over pooled samples, Freedman-Diaconis width, 20..1000 bins, epsilon=1e-9 smoothing";

/// `100·(1 − |sim − ref|/ref)`; `None` when the reference is not positive.
pub fn accuracy(sim_value: f64, ref_value: f64) -> Option<f64> {
    (ref_value > 0.0).then(|| 100.0 * (1.0 - (sim_value - ref_value).abs() / ref_value))
}

/// Means over completed trips only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean_speed: f64,
    pub mean_trip_length: f64,
    pub vehicle_count: usize,
}

impl SummaryStats {
    pub fn from_traces(traces: &[TripTrace]) -> Self {
        let n = traces.len();
        if n == 0 {
            return Self {
                mean_speed: 0.0,
                mean_trip_length: 0.0,
                vehicle_count: 0,
            };
        }
        Self {
            mean_speed: traces.iter().map(|t| t.mean_speed).sum::<f64>() / n as f64,
            mean_trip_length: traces.iter().map(|t| t.trip_length).sum::<f64>() / n as f64,
            vehicle_count: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub twin: SummaryStats,
    pub reference: SummaryStats,
    /// Percent.
    pub speed_accuracy: Option<f64>,
    pub trip_length_accuracy: Option<f64>,
    pub count_accuracy: Option<f64>,
    /// `KL(reference ‖ twin)`, nats.
    pub kl: f64,
    pub js: f64,
    /// m/s.
    pub wasserstein: f64,
    pub bhattacharyya: f64,
    pub bins: usize,
    pub bin_width: f64,
    pub divergence_units: String,
    pub accuracy_definition: String,
    pub binning: String,
}

/// Per-trip space-mean speeds.
pub fn trip_speeds(traces: &[TripTrace]) -> Vec<f64> {
    traces.iter().map(|t| t.mean_speed).collect()
}

pub fn validation_report(
    twin: &SimOutput,
    reference: &SimOutput,
) -> Result<ValidationReport, ValidateError> {
    if twin.traces.is_empty() {
        return Err(ValidateError::NoCompletedTrips("twin"));
    }
    if reference.traces.is_empty() {
        return Err(ValidateError::NoCompletedTrips("reference"));
    }
    let twin_stats = SummaryStats::from_traces(&twin.traces);
    let ref_stats = SummaryStats::from_traces(&reference.traces);
    let (ref_hist, twin_hist) =
        build_histogram(&trip_speeds(&reference.traces), &trip_speeds(&twin.traces))?;
    let d = Divergences::between(&ref_hist, &twin_hist)?;
    Ok(ValidationReport {
        speed_accuracy: accuracy(twin_stats.mean_speed, ref_stats.mean_speed),
        trip_length_accuracy: accuracy(twin_stats.mean_trip_length, ref_stats.mean_trip_length),
        count_accuracy: accuracy(
            twin_stats.vehicle_count as f64,
            ref_stats.vehicle_count as f64,
        ),
        twin: twin_stats,
        reference: ref_stats,
        kl: d.kl,
        js: d.js,
        wasserstein: d.wasserstein,
        bhattacharyya: d.bhattacharyya,
        bins: ref_hist.bins(),
        bin_width: ref_hist.bin_width(),
        divergence_units: "nats".to_string(),
        accuracy_definition: ACCURACY_DEFINITION.to_string(),
        binning: BINNING.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::VehicleId;
    use crate::microsim::TraceSample;

    fn output(speeds: &[f64]) -> SimOutput {
        let traces: Vec<TripTrace> = speeds
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let samples = vec![
                    TraceSample {
                        t: 0.0,
                        position: 0.0,
                        lane: 0,
                        speed: v,
                    },
                    TraceSample {
                        t: 100.0,
                        position: 100.0 * v,
                        lane: 0,
                        speed: v,
                    },
                ];
                TripTrace::from_samples(VehicleId(i as u64), samples).unwrap()
            })
            .collect();
        SimOutput {
            completed: traces.len(),
            inserted: traces.len(),
            traces,
            ..SimOutput::default()
        }
    }

    #[test]
    fn accuracy_definition() {
        assert_eq!(accuracy(10.0, 10.0), Some(100.0));
        assert!((accuracy(0.931 * 27.0, 27.0).unwrap() - 93.1).abs() < 1e-9);
        assert!((accuracy(15.0, 10.0).unwrap() - 50.0).abs() < 1e-12);
        assert_eq!(accuracy(1.0, 0.0), None);
    }

    #[test]
    fn count_accuracy_is_exact_only_on_equality() {
        assert_eq!(accuracy(100.0, 100.0), Some(100.0));
        assert!(accuracy(99.0, 100.0).unwrap() < 100.0);
    }

    #[test]
    fn self_comparison_is_perfect() {
        let out = output(&[28.0, 29.5, 30.0, 31.2, 32.0, 33.1]);
        let r = validation_report(&out, &out).unwrap();
        assert_eq!(r.speed_accuracy, Some(100.0));
        assert_eq!(r.trip_length_accuracy, Some(100.0));
        assert_eq!(r.count_accuracy, Some(100.0));
        assert!(r.kl.abs() < 1e-12 && r.js.abs() < 1e-12);
        assert!(r.wasserstein.abs() < 1e-12 && r.bhattacharyya.abs() < 1e-12);
        assert_eq!(r.divergence_units, "nats");
    }

    #[test]
    fn uniform_shift_moves_wasserstein() {
        let base: Vec<f64> = (0..200).map(|i| 25.0 + 0.05 * i as f64).collect();
        let shifted: Vec<f64> = base.iter().map(|v| v - 2.0).collect();
        let r = validation_report(&output(&shifted), &output(&base)).unwrap();
        assert!(
            (r.wasserstein - 2.0).abs() <= r.bin_width,
            "{} vs {}",
            r.wasserstein,
            r.bin_width
        );
        let mean = r.reference.mean_speed;
        assert!((r.speed_accuracy.unwrap() - 100.0 * (1.0 - 2.0 / mean)).abs() < 1e-9);
    }

    #[test]
    fn empty_output_is_an_error() {
        let out = output(&[30.0]);
        assert!(validation_report(&SimOutput::default(), &out).is_err());
        assert!(validation_report(&out, &SimOutput::default()).is_err());
    }
}
