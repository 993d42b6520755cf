//! Matched-pairs significance: two-sided test on the per-dialog score
//! differences using the normal approximation, p = erfc(|z|/sqrt(2)) with
//! z = mean / stderr. Identical score lists give p = 1 exactly; a nonzero
//! constant difference has no variance and returns the machine floor.

use thiserror::Error;

/// Smallest reportable p-value; returned when the difference is certain.
pub const P_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SigError {
    #[error("matched pairs need equal lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least 2 pairs, got {0}")]
    TooFewPairs(usize),
}

pub fn matched_pairs_test(scores_a: &[f64], scores_b: &[f64]) -> Result<f64, SigError> {
    if scores_a.len() != scores_b.len() {
        return Err(SigError::LengthMismatch { a: scores_a.len(), b: scores_b.len() });
    }
    let n = scores_a.len();
    if n < 2 {
        return Err(SigError::TooFewPairs(n));
    }
    let diffs: Vec<f64> = scores_a.iter().zip(scores_b).map(|(a, b)| a - b).collect();
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok(1.0);
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0);
    if var == 0.0 {
        return Ok(P_FLOOR);
    }
    let z = mean / (var / n as f64).sqrt();
    let p = libm::erfc(z.abs() / std::f64::consts::SQRT_2);
    Ok(p.clamp(P_FLOOR, 1.0))
}
