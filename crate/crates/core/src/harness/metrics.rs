use serde::Serialize;

use crate::error::{Error, Result};

/// Which partition a set of metrics was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetLabel {
    Train,
    Validation,
    Test,
}

/// Root mean squared error between two equal-length sequences.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(Error::Shape(format!(
            "rmse needs equal non-empty lengths, got {} and {}",
            actual.len(),
            predicted.len()
        )));
    }
    let sum: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok((sum / actual.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonMetrics {
    pub per_horizon_rmse: Vec<f64>,
    /// RMSE over all `M × horizon` values pooled.
    pub overall_rmse: f64,
    pub label: DatasetLabel,
}

/// Per-horizon and pooled RMSE of row-major `M × horizon` matrices.
pub fn horizon_rmse(predictions: &[f64], targets: &[f64], horizon: usize, label: DatasetLabel) -> Result<HorizonMetrics> {
    if horizon == 0 || predictions.len() != targets.len() || predictions.is_empty() || predictions.len() % horizon != 0 {
        return Err(Error::Shape(format!(
            "horizon_rmse: {} predictions, {} targets, horizon {horizon}",
            predictions.len(),
            targets.len()
        )));
    }
    let m = predictions.len() / horizon;
    let mut sums = vec![0.0; horizon];
    for w in 0..m {
        for h in 0..horizon {
            let d = predictions[w * horizon + h] - targets[w * horizon + h];
            sums[h] += d * d;
        }
    }
    Ok(HorizonMetrics {
        per_horizon_rmse: sums.iter().map(|s| (s / m as f64).sqrt()).collect(),
        overall_rmse: rmse(targets, predictions)?,
        label,
    })
}

/// Ranks starting at 1, ties sharing their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average ranks.
///
/// Returns a Range error when either sequence is constant, since the
/// coefficient is undefined there.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Shape(format!("spearman needs two equal lengths ≥ 2, got {} and {}", x.len(), y.len())));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Range("spearman correlation of a constant sequence".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
