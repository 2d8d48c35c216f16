use chrono::NaiveDateTime;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::confidence_interval;

use super::TimeSeriesFrame;

/// Pairwise Pearson coefficients. Pairs involving a constant feature are
/// reported as 0 and flagged in `undefined`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub feature_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub undefined: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.feature_names.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coefficients[i * self.size() + j]
    }

    pub fn is_undefined(&self, i: usize, j: usize) -> bool {
        self.undefined[i * self.size() + j]
    }

    pub fn by_name(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.feature_names.iter().position(|n| n == a)?;
        let j = self.feature_names.iter().position(|n| n == b)?;
        Some(self.get(i, j))
    }
}

pub fn pearson_matrix(frame: &TimeSeriesFrame) -> Result<CorrelationMatrix> {
    let (rows, cols) = (frame.rows(), frame.cols());
    if rows < 2 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 2 rows, got {rows}"
        )));
    }
    let values = frame.dense_values()?;
    let column = |c: usize| values.iter().skip(c).step_by(cols).copied();

    let means: Vec<f64> = (0..cols).map(|c| column(c).sum::<f64>() / rows as f64).collect();
    let constant: Vec<bool> = (0..cols)
        .map(|c| {
            let first = values[c];
            column(c).all(|x| x == first)
        })
        .collect();

    let mut coefficients = vec![0.0; cols * cols];
    let mut undefined = vec![false; cols * cols];
    for i in 0..cols {
        for j in i..cols {
            let (a, b) = (i * cols + j, j * cols + i);
            if constant[i] || constant[j] {
                undefined[a] = true;
                undefined[b] = true;
                continue;
            }
            let r = if i == j {
                1.0
            } else {
                let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
                for (x, y) in column(i).zip(column(j)) {
                    let (dx, dy) = (x - means[i], y - means[j]);
                    sxy += dx * dy;
                    sxx += dx * dx;
                    syy += dy * dy;
                }
                (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
            };
            coefficients[a] = r;
            coefficients[b] = r;
        }
    }
    Ok(CorrelationMatrix {
        feature_names: frame.feature_names().to_vec(),
        coefficients,
        undefined,
    })
}

/// Mean and 95% half-width of one feature over a period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodSummary {
    pub station: String,
    pub feature: String,
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub mean: f64,
    pub half_width_95: f64,
    pub sample_count: usize,
}

/// Summarises `feature` over `[start, end]` (both inclusive), skipping
/// missing observations.
pub fn period_stats(
    frame: &TimeSeriesFrame,
    feature: &str,
    start: NaiveDateTime,
    end: NaiveDateTime,
) -> Result<PeriodSummary> {
    let col = frame.require_feature(feature)?;
    let samples: Vec<f64> = frame
        .timestamps()
        .iter()
        .enumerate()
        .filter(|(_, t)| **t >= start && **t <= end)
        .filter_map(|(r, _)| frame.get(r, col))
        .collect();
    if samples.is_empty() {
        return Err(Error::Range(format!(
            "no {feature} samples between {start} and {end}"
        )));
    }
    let (mean, half_width_95) = confidence_interval(&samples)?;
    Ok(PeriodSummary {
        station: frame.station().to_string(),
        feature: feature.to_string(),
        start,
        end,
        mean,
        half_width_95,
        sample_count: samples.len(),
    })
}

/// Rows with timestamps in `[start, end)`.
pub fn seasonal_slice(
    frame: &TimeSeriesFrame,
    start: NaiveDateTime,
    end: NaiveDateTime,
) -> Result<TimeSeriesFrame> {
    if start >= end {
        return Err(Error::Range(format!("empty interval {start} .. {end}")));
    }
    let rows = frame.rows_between(start, end);
    if rows.is_empty() {
        return Err(Error::Range(format!("no rows between {start} and {end}")));
    }
    Ok(frame.select_rows(rows))
}
