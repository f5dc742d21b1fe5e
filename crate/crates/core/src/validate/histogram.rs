use serde::{Deserialize, Serialize};

use super::ValidateError;

pub const MIN_BINS: usize = 20;
pub const MAX_BINS: usize = 1000;
/// Mass added to every bin before renormalising.
pub const SMOOTHING_EPSILON: f64 = 1e-9;

/// A probability distribution over uniform-width speed bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedHistogram {
    edges: Vec<f64>,
    probabilities: Vec<f64>,
    sample_count: usize,
}

impl SpeedHistogram {
    /// Wraps explicit probabilities. Edges must be strictly increasing and
    /// one longer than the probabilities, which must be non-negative and sum
    /// to 1 within 1e-12.
    pub fn from_probabilities(
        edges: Vec<f64>,
        probabilities: Vec<f64>,
    ) -> Result<Self, ValidateError> {
        if edges.len() != probabilities.len() + 1 || probabilities.is_empty() {
            return Err(ValidateError::InvalidHistogram(format!(
                "{} edges for {} bins",
                edges.len(),
                probabilities.len()
            )));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ValidateError::InvalidHistogram(
                "edges not strictly increasing".into(),
            ));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(ValidateError::InvalidHistogram(
                "negative probability".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ValidateError::InvalidHistogram(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            edges,
            probabilities,
            sample_count: 0,
        })
    }

    /// Evenly spaced edges from `lo` to `hi`.
    pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
        edges.push(hi);
        edges
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn bins(&self) -> usize {
        self.probabilities.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.edges[self.edges.len() - 1] - self.edges[0]) / self.bins() as f64
    }

    /// Mean of the bin centres weighted by probability.
    pub fn mean(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.probabilities)
            .map(|(e, p)| 0.5 * (e[0] + e[1]) * p)
            .sum()
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<(), ValidateError> {
        if self.edges != other.edges {
            return Err(ValidateError::MismatchedBins);
        }
        Ok(())
    }
}

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn bin_count(pooled_sorted: &[f64], range: f64) -> usize {
    let n = pooled_sorted.len() as f64;
    let iqr = quantile(pooled_sorted, 0.75) - quantile(pooled_sorted, 0.25);
    let width = 2.0 * iqr / n.cbrt();
    if width > 0.0 {
        ((range / width).ceil() as usize).clamp(MIN_BINS, MAX_BINS)
    } else {
        MIN_BINS
    }
}

fn smoothed(edges: &[f64], samples: &[f64]) -> SpeedHistogram {
    let bins = edges.len() - 1;
    let lo = edges[0];
    let width = (edges[bins] - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let idx = (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = samples.len() as f64;
    let norm = 1.0 + bins as f64 * SMOOTHING_EPSILON;
    SpeedHistogram {
        edges: edges.to_vec(),
        probabilities: counts
            .iter()
            .map(|&c| (c as f64 / n + SMOOTHING_EPSILON) / norm)
            .collect(),
        sample_count: samples.len(),
    }
}

/// Bins two samples on shared edges spanning the pooled range, with a
/// Freedman–Diaconis width over the pooled data (between [`MIN_BINS`] and
/// [`MAX_BINS`] bins), then ε-smooths both so every bin is positive.
pub fn build_histogram(
    samples: &[f64],
    paired: &[f64],
) -> Result<(SpeedHistogram, SpeedHistogram), ValidateError> {
    if samples.is_empty() || paired.is_empty() {
        return Err(ValidateError::EmptySample);
    }
    let mut pooled: Vec<f64> = samples.iter().chain(paired).copied().collect();
    if pooled.iter().any(|x| !x.is_finite()) {
        return Err(ValidateError::InvalidHistogram("non-finite sample".into()));
    }
    pooled.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (pooled[0], pooled[pooled.len() - 1]);
    if hi == lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let edges = SpeedHistogram::uniform_edges(lo, hi, bin_count(&pooled, hi - lo));
    Ok((smoothed(&edges, samples), smoothed(&edges, paired)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn identical_samples_give_identical_histograms() {
        let xs = [28.0, 30.5, 31.0, 33.2, 29.9];
        let (p, q) = build_histogram(&xs, &xs).unwrap();
        assert_eq!(p, q);
        assert!((p.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_samples_land_in_end_bins() {
        let (p, q) = build_histogram(&[0.0; 10], &[1.0; 10]).unwrap();
        assert_eq!(p.bins(), MIN_BINS);
        let top = |h: &SpeedHistogram| {
            h.probabilities()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0
        };
        assert_eq!(top(&p), 0);
        assert_eq!(top(&q), MIN_BINS - 1);
        assert!(p.probabilities()[0] > 1.0 - 1e-6);
    }

    #[test]
    fn normal_sample_mean() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(30);
        let dist = Normal::new(30.0, 2.0).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| dist.sample(&mut rng)).collect();
        let (p, _) = build_histogram(&xs, &xs).unwrap();
        assert!((p.mean() - 30.0).abs() < 0.1, "{}", p.mean());
        assert!(p.bins() > MIN_BINS);
    }

    #[test]
    fn constant_pooled_sample_gets_unit_range() {
        let (p, _) = build_histogram(&[5.0, 5.0], &[5.0]).unwrap();
        assert_eq!(p.edges()[0], 4.5);
        assert_eq!(*p.edges().last().unwrap(), 5.5);
    }

    #[test]
    fn empty_and_invalid_inputs() {
        assert_eq!(
            build_histogram(&[], &[1.0]),
            Err(ValidateError::EmptySample)
        );
        assert!(build_histogram(&[f64::NAN], &[1.0]).is_err());
        assert!(SpeedHistogram::from_probabilities(vec![0.0, 1.0], vec![0.5]).is_err());
        assert!(SpeedHistogram::from_probabilities(vec![0.0, 0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(SpeedHistogram::from_probabilities(vec![0.0, 1.0, 2.0], vec![0.5, 0.5]).is_ok());
    }
}
