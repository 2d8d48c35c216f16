use chrono::{Duration, NaiveDateTime};

use crate::error::{Error, Result};
use crate::interval::confidence_interval;
use crate::models::{ModelSpec, TrainedModel};
use crate::station::{format_timestamp, TimeSeriesFrame, CADENCE_HOURS, TARGET_FEATURE};

/// Anything that maps a scaled window to a scaled horizon block.
pub trait Forecaster {
    fn spec(&self) -> &ModelSpec;
    fn predict_window(&self, window: &[f64]) -> Result<Vec<f64>>;
    /// Scaled PM2.5 back to concentration units; identity by default.
    fn denormalize(&self, value: f64) -> Result<f64> {
        Ok(value)
    }
}

impl Forecaster for TrainedModel {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn predict_window(&self, window: &[f64]) -> Result<Vec<f64>> {
        TrainedModel::predict_window(self, window)
    }

    fn denormalize(&self, value: f64) -> Result<f64> {
        match self.scaler {
            Some(_) => TrainedModel::denormalize(self, value),
            None => Ok(value),
        }
    }
}

/// One closed-loop trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scaled: Vec<f64>,
    pub denormalized: Vec<f64>,
    pub invocations: usize,
}

/// The last `lookback` scaled PM2.5 values of a frame.
pub fn seed_window(frame: &TimeSeriesFrame, lookback: usize) -> Result<Vec<f64>> {
    let col = frame.require_feature(TARGET_FEATURE)?;
    if lookback == 0 || frame.rows() < lookback {
        return Err(Error::InsufficientData(format!("need {lookback} rows for a seed window, frame has {}", frame.rows())));
    }
    (frame.rows() - lookback..frame.rows())
        .map(|r| frame.get(r, col).ok_or_else(|| Error::MissingValues(format!("{TARGET_FEATURE} missing at row {r}"))))
        .collect()
}

/// Block-recursive forecast: each invocation predicts `horizon` values, which
/// are appended to the history; the window then slides by `horizon`. The
/// result is truncated to `steps`.
pub fn recursive_forecast<F: Forecaster + ?Sized>(model: &F, seed: &[f64], steps: usize) -> Result<Trajectory> {
    let spec = model.spec();
    if spec.input_features != 1 {
        return Err(Error::UnsupportedMode(format!(
            "recursive forecasting feeds back PM2.5 only; model takes {} input features",
            spec.input_features
        )));
    }
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    if seed.len() != spec.lookback {
        return Err(Error::Shape(format!("seed window has {} values, lookback is {}", seed.len(), spec.lookback)));
    }
    let mut history = seed.to_vec();
    let mut scaled = Vec::with_capacity(steps);
    let mut invocations = 0;
    while scaled.len() < steps {
        let window = &history[history.len() - spec.lookback..];
        let block = model.predict_window(window)?;
        invocations += 1;
        scaled.extend_from_slice(&block);
        history.extend_from_slice(&block);
    }
    scaled.truncate(steps);
    let denormalized = scaled.iter().map(|&v| model.denormalize(v)).collect::<Result<_>>()?;
    Ok(Trajectory { scaled, denormalized, invocations })
}

/// Per-step mean and 95% band over trial trajectories, in PM2.5 units.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub timestamps: Vec<NaiveDateTime>,
    pub mean: Vec<f64>,
    pub half_width: Vec<f64>,
    /// `trials × steps`, denormalized.
    pub trajectories: Vec<Vec<f64>>,
}

impl ForecastResult {
    pub fn steps(&self) -> usize {
        self.mean.len()
    }

    /// `timestamp,mean,lower95,upper95`.
    pub fn write_csv<W: std::io::Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "timestamp,mean,lower95,upper95")?;
        for ((t, m), h) in self.timestamps.iter().zip(&self.mean).zip(&self.half_width) {
            writeln!(sink, "{},{},{},{}", format_timestamp(t), m, m - h, m + h)?;
        }
        Ok(())
    }
}

/// Runs every model from the same seed window and aggregates per step.
/// Timestamps continue from `last_observed` at the 8-hour cadence.
pub fn forecast_with_uncertainty<F: Forecaster>(
    models: &[F],
    seed: &[f64],
    steps: usize,
    last_observed: NaiveDateTime,
) -> Result<ForecastResult> {
    let first = models.first().ok_or_else(|| Error::Config("no models to forecast with".into()))?;
    if let Some(other) = models.iter().find(|m| m.spec() != first.spec()) {
        return Err(Error::Config(format!(
            "models disagree on spec: {:?} vs {:?}",
            first.spec(),
            other.spec()
        )));
    }
    let trajectories = models
        .iter()
        .map(|m| recursive_forecast(m, seed, steps).map(|t| t.denormalized))
        .collect::<Result<Vec<_>>>()?;
    let mut mean = Vec::with_capacity(steps);
    let mut half_width = Vec::with_capacity(steps);
    for s in 0..steps {
        let column: Vec<f64> = trajectories.iter().map(|t| t[s]).collect();
        let (m, h) = confidence_interval(&column)?;
        mean.push(m);
        half_width.push(h);
    }
    let timestamps = (1..=steps as i64)
        .map(|k| last_observed + Duration::hours(CADENCE_HOURS * k))
        .collect();
    Ok(ForecastResult { timestamps, mean, half_width, trajectories })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use crate::station::testing::origin;

    struct Stub {
        spec: ModelSpec,
        rule: fn(&[f64], usize) -> Vec<f64>,
        offset: f64,
    }

    impl Stub {
        fn new(features: usize, rule: fn(&[f64], usize) -> Vec<f64>) -> Self {
            Self { spec: ModelSpec::new(ModelKind::Lstm, 5, features, 10), rule, offset: 0.0 }
        }
    }

    impl Forecaster for Stub {
        fn spec(&self) -> &ModelSpec {
            &self.spec
        }

        fn predict_window(&self, window: &[f64]) -> Result<Vec<f64>> {
            Ok((self.rule)(window, self.spec.horizon).into_iter().map(|v| v + self.offset).collect())
        }
    }

    fn repeat_last(window: &[f64], horizon: usize) -> Vec<f64> {
        vec![*window.last().unwrap(); horizon]
    }

    fn count_up(window: &[f64], horizon: usize) -> Vec<f64> {
        let last = *window.last().unwrap();
        (1..=horizon).map(|k| last + k as f64).collect()
    }

    const SEED: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

    #[test]
    fn ninety_steps_take_nine_invocations() {
        let t = recursive_forecast(&Stub::new(1, repeat_last), &SEED, 90).unwrap();
        assert_eq!((t.scaled.len(), t.invocations), (90, 9));
        assert!(t.scaled.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn truncation_and_feedback() {
        let t = recursive_forecast(&Stub::new(1, count_up), &SEED, 7).unwrap();
        assert_eq!((t.scaled.len(), t.invocations), (7, 1));
        let t = recursive_forecast(&Stub::new(1, count_up), &SEED, 91).unwrap();
        assert_eq!((t.scaled.len(), t.invocations), (91, 10));
        // Each block continues from the previous block's last value.
        let expected: Vec<f64> = (1..=91).map(|k| 0.5 + k as f64).collect();
        assert_eq!(t.scaled, expected);
    }

    #[test]
    fn multivariate_model_is_unsupported() {
        let err = recursive_forecast(&Stub::new(11, repeat_last), &[0.0; 55], 10).unwrap_err();
        assert!(matches!(err, Error::UnsupportedMode(_)));
    }

    #[test]
    fn bad_arguments() {
        let stub = Stub::new(1, repeat_last);
        assert!(recursive_forecast(&stub, &SEED, 0).is_err());
        assert!(recursive_forecast(&stub, &SEED[1..], 10).is_err());
    }

    #[test]
    fn identical_models_give_zero_width() {
        let models = [Stub::new(1, count_up), Stub::new(1, count_up)];
        let r = forecast_with_uncertainty(&models, &SEED, 90, origin()).unwrap();
        assert!(r.half_width.iter().all(|&h| h == 0.0));
        assert_eq!(r.timestamps[0], origin() + Duration::hours(8));
        assert_eq!(r.timestamps[89], origin() + Duration::hours(720));
    }

    #[test]
    fn mean_matches_brute_force() {
        let models: Vec<Stub> = [0.0, 0.5, 2.0]
            .iter()
            .map(|&offset| Stub { offset, ..Stub::new(1, count_up) })
            .collect();
        let r = forecast_with_uncertainty(&models, &SEED, 25, origin()).unwrap();
        for s in 0..25 {
            let column: Vec<f64> = models
                .iter()
                .map(|m| recursive_forecast(m, &SEED, 25).unwrap().scaled[s])
                .collect();
            let mean = column.iter().sum::<f64>() / 3.0;
            assert!((r.mean[s] - mean).abs() < 1e-12);
            assert!(r.half_width[s] > 0.0);
            assert_eq!(r.trajectories[1][s], column[1]);
        }
    }

    #[test]
    fn output_length_is_steps() {
        let models = [Stub::new(1, repeat_last)];
        for steps in [1, 90, 91] {
            let r = forecast_with_uncertainty(&models, &SEED, steps, origin()).unwrap();
            assert_eq!((r.steps(), r.timestamps.len(), r.trajectories[0].len()), (steps, steps, steps));
        }
    }

    #[test]
    fn spec_mismatch_is_config_error() {
        let mut other = Stub::new(1, repeat_last);
        other.spec.horizon = 5;
        let err = forecast_with_uncertainty(&[Stub::new(1, repeat_last), other], &SEED, 10, origin()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(matches!(forecast_with_uncertainty::<Stub>(&[], &SEED, 10, origin()), Err(Error::Config(_))));
    }

    #[test]
    fn csv_band() {
        let r = forecast_with_uncertainty(&[Stub::new(1, repeat_last)], &SEED, 2, origin()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "timestamp,mean,lower95,upper95\n2019-01-01T08:00,0.5,0.5,0.5\n2019-01-01T16:00,0.5,0.5,0.5\n"
        );
    }
}
