use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::TimeSeriesFrame;

/// Per-feature extrema for min-max scaling to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub feature_names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    pub fn new(feature_names: Vec<String>, min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != feature_names.len() || max.len() != feature_names.len() {
            return Err(Error::Shape("scaler extrema do not match feature count".into()));
        }
        if let Some(i) = (0..min.len()).find(|&i| !(max[i] >= min[i])) {
            return Err(Error::Range(format!(
                "scaler maximum below minimum for {}",
                feature_names[i]
            )));
        }
        Ok(Self { feature_names, min, max })
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Schema(format!("scaler has no feature {name}")))
    }

    pub fn scale_value(&self, feature: usize, x: f64) -> f64 {
        let span = self.max[feature] - self.min[feature];
        if span == 0.0 {
            0.0
        } else {
            (x - self.min[feature]) / span
        }
    }

    pub fn unscale_value(&self, feature: usize, x: f64) -> f64 {
        let span = self.max[feature] - self.min[feature];
        if span == 0.0 {
            self.min[feature]
        } else {
            x * span + self.min[feature]
        }
    }

    fn check_frame(&self, frame: &TimeSeriesFrame) -> Result<()> {
        if frame.feature_names() != self.feature_names.as_slice() {
            return Err(Error::Schema("scaler features do not match frame".into()));
        }
        if frame.missing_count() > 0 {
            return Err(Error::MissingValues(format!(
                "{} missing entries; impute before scaling",
                frame.missing_count()
            )));
        }
        Ok(())
    }

    fn map(&self, frame: &TimeSeriesFrame, f: impl Fn(&Self, usize, f64) -> f64) -> Result<TimeSeriesFrame> {
        self.check_frame(frame)?;
        let cols = frame.cols();
        let values = frame
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v.map(|x| f(self, i % cols, x)))
            .collect();
        Ok(frame.with_values(values))
    }
}

/// Fits per-feature extrema. Fit on the training portion only.
pub fn minmax_fit(frame: &TimeSeriesFrame) -> Result<ScalerParams> {
    if frame.rows() == 0 {
        return Err(Error::InsufficientData("cannot fit a scaler on an empty frame".into()));
    }
    let values = frame.dense_values()?;
    let cols = frame.cols();
    let mut min = vec![f64::INFINITY; cols];
    let mut max = vec![f64::NEG_INFINITY; cols];
    for (i, &x) in values.iter().enumerate() {
        min[i % cols] = min[i % cols].min(x);
        max[i % cols] = max[i % cols].max(x);
    }
    ScalerParams::new(frame.feature_names().to_vec(), min, max)
}

pub fn minmax_apply(frame: &TimeSeriesFrame, scaler: &ScalerParams) -> Result<TimeSeriesFrame> {
    scaler.map(frame, ScalerParams::scale_value)
}

pub fn minmax_invert(frame: &TimeSeriesFrame, scaler: &ScalerParams) -> Result<TimeSeriesFrame> {
    scaler.map(frame, ScalerParams::unscale_value)
}
