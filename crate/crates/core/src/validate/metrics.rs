//! Divergences between two histograms on shared bins. Logarithms are
//! natural, so KL, JS and Bhattacharyya are in nats.

use serde::{Deserialize, Serialize};

use super::{SpeedHistogram, ValidateError};

/// `Σ pᵢ ln(pᵢ/qᵢ)`, with `0·ln 0 = 0`.
pub fn kl_divergence(p: &SpeedHistogram, q: &SpeedHistogram) -> Result<f64, ValidateError> {
    p.check_compatible(q)?;
    let mut total = 0.0;
    for (&pi, &qi) in p.probabilities().iter().zip(q.probabilities()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(ValidateError::ZeroReferenceMass);
        }
        total += pi * (pi / qi).ln();
    }
    Ok(total.max(0.0))
}

/// Symmetric, bounded by ln 2.
pub fn js_divergence(p: &SpeedHistogram, q: &SpeedHistogram) -> Result<f64, ValidateError> {
    p.check_compatible(q)?;
    let half_kl = |x: f64, m: f64| {
        if x == 0.0 {
            0.0
        } else {
            0.5 * x * (x / m).ln()
        }
    };
    let total: f64 = p
        .probabilities()
        .iter()
        .zip(q.probabilities())
        .map(|(&pi, &qi)| {
            let m = 0.5 * (pi + qi);
            half_kl(pi, m) + half_kl(qi, m)
        })
        .sum();
    Ok(total.clamp(0.0, std::f64::consts::LN_2))
}

/// 1-D earth mover's distance: `Σ |F_p − F_q| · binwidth`.
pub fn wasserstein1(p: &SpeedHistogram, q: &SpeedHistogram) -> Result<f64, ValidateError> {
    p.check_compatible(q)?;
    let width = p.bin_width();
    let (mut fp, mut fq, mut total) = (0.0, 0.0, 0.0);
    // The CDFs meet at 1 after the last bin, so it contributes nothing.
    let inner = p.bins() - 1;
    for (&pi, &qi) in p.probabilities()[..inner]
        .iter()
        .zip(&q.probabilities()[..inner])
    {
        fp += pi;
        fq += qi;
        total += (fp - fq).abs();
    }
    Ok(total.max(0.0) * width)
}

/// `−ln Σ √(pᵢ qᵢ)`.
pub fn bhattacharyya(p: &SpeedHistogram, q: &SpeedHistogram) -> Result<f64, ValidateError> {
    p.check_compatible(q)?;
    let coefficient: f64 = p
        .probabilities()
        .iter()
        .zip(q.probabilities())
        .map(|(&pi, &qi)| (pi * qi).sqrt())
        .sum();
    Ok((-coefficient.min(1.0).ln()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergences {
    pub kl: f64,
    pub js: f64,
    pub wasserstein: f64,
    pub bhattacharyya: f64,
}

impl Divergences {
    /// All four, with KL taken as `KL(reference ‖ twin)`.
    pub fn between(
        reference: &SpeedHistogram,
        twin: &SpeedHistogram,
    ) -> Result<Self, ValidateError> {
        Ok(Self {
            kl: kl_divergence(reference, twin)?,
            js: js_divergence(reference, twin)?,
            wasserstein: wasserstein1(reference, twin)?,
            bhattacharyya: bhattacharyya(reference, twin)?,
        })
    }
}
