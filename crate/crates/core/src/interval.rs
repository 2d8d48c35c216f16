//! Normal-approximation 95% confidence intervals over independent samples.

use crate::error::{Error, Result};

/// z-score of the two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Returns `(mean, half_width)` with half-width `1.96 * s / sqrt(n)`, `s` the
/// sample standard deviation (n - 1 denominator). A single sample has zero
/// half-width.
pub fn confidence_interval(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Shape("confidence interval of an empty sample".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 || samples.iter().all(|&x| x == samples[0]) {
        return Ok((mean, 0.0));
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, Z_95 * (var / n).sqrt()))
}
