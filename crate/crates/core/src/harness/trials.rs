use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::confidence_interval;
use crate::models::{build_model, predict_batch, train, ModelSpec, TrainedModel, TrainingConfig};
use crate::station::{impute_neighbor_median, minmax_apply, minmax_fit, ScalerParams, TimeSeriesFrame, TARGET_FEATURE};
use crate::windowing::{chronological_split, halve_for_validation, shuffle_windows, windows_for, SplitSpec, Strategy, WindowedDataset};

use super::metrics::{horizon_rmse, DatasetLabel, HorizonMetrics};

/// Everything a trial needs: scaled frame, fitted scaler and the three
/// window partitions.
#[derive(Debug, Clone)]
pub struct DataBundle {
    pub frame: TimeSeriesFrame,
    pub scaler: ScalerParams,
    pub split: SplitSpec,
    pub train: WindowedDataset,
    pub validation: WindowedDataset,
    pub test: WindowedDataset,
    /// Number of cells filled by imputation.
    pub repaired: usize,
}

/// Imputes, scales with extrema from rows before `train_end`, windows per the
/// split strategy, and partitions train / validation / test.
pub fn prepare_data(
    raw: &TimeSeriesFrame,
    lookback: usize,
    horizon: usize,
    split: &SplitSpec,
    impute_radius: usize,
) -> Result<DataBundle> {
    split.validate()?;
    let repaired = raw.missing_count();
    let imputed = if repaired > 0 { impute_neighbor_median(raw, impute_radius)? } else { raw.clone() };
    let fit_rows = imputed.timestamps().partition_point(|t| *t < split.train_end);
    if fit_rows == 0 {
        return Err(Error::Split(format!("no rows before train_end {}", split.train_end)));
    }
    let scaler = minmax_fit(&imputed.select_rows(0..fit_rows))?;
    let frame = minmax_apply(&imputed, &scaler)?;
    let windows = windows_for(&frame, lookback, horizon, split)?;
    let (mut train, holdout) = chronological_split(&windows, &frame, split.train_end)?;
    let (validation, test) = halve_for_validation(&holdout)?;
    if split.strategy == Strategy::Shuffled {
        let seed = split.shuffle_seed.ok_or_else(|| Error::Config("shuffled strategy needs shuffle_seed".into()))?;
        train = shuffle_windows(&train, seed);
    }
    Ok(DataBundle { frame, scaler, split: split.clone(), train, validation, test, repaired })
}

#[derive(Debug, Clone)]
pub struct TrialMetrics {
    pub train: HorizonMetrics,
    pub validation: HorizonMetrics,
    pub test: HorizonMetrics,
    pub model: TrainedModel,
}

#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub seed: u64,
    pub outcome: Result<TrialMetrics>,
}

/// Mean and 95% half-width of one metric over completed trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: String,
    pub mean: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    /// `Train`, `Test`, then `Step-1 … Step-N` on the test partition.
    pub rows: Vec<MetricSummary>,
    pub validation: MetricSummary,
    pub trials: usize,
    pub completed: usize,
    pub diverged: usize,
    pub seeds: Vec<u64>,
    pub config: TrainingConfig,
}

impl ExperimentSummary {
    /// `metric,mean,half_width` with one row per summary row.
    pub fn write_csv<W: std::io::Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "metric,mean,half_width")?;
        for row in &self.rows {
            writeln!(sink, "{},{},{}", row.metric, row.mean, row.half_width)?;
        }
        Ok(())
    }
}

pub struct ExperimentRun {
    pub summary: ExperimentSummary,
    pub records: Vec<TrialRecord>,
}

impl ExperimentRun {
    pub fn models(&self) -> impl Iterator<Item = &TrainedModel> {
        self.records.iter().filter_map(|r| r.outcome.as_ref().ok()).map(|m| &m.model)
    }
}

/// How trials are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    /// Rayon pool, optionally capped at the given thread count.
    Parallel(Option<usize>),
}

fn evaluate(model: &TrainedModel, data: &WindowedDataset, scaler: &ScalerParams, label: DatasetLabel) -> Result<HorizonMetrics> {
    let preds = predict_batch(model, data)?;
    let col = scaler.feature_index(TARGET_FEATURE)?;
    let targets: Vec<f64> = data.targets().iter().map(|&v| scaler.unscale_value(col, v)).collect();
    horizon_rmse(&preds.denormalized, &targets, data.horizon(), label)
}

fn run_one(bundle: &DataBundle, spec: &ModelSpec, config: &TrainingConfig, seed: u64) -> Result<TrialMetrics> {
    let model = build_model(spec, seed)?.with_scaler(bundle.scaler.clone());
    let model = train(model, &bundle.train, config)?;
    Ok(TrialMetrics {
        train: evaluate(&model, &bundle.train, &bundle.scaler, DatasetLabel::Train)?,
        validation: evaluate(&model, &bundle.validation, &bundle.scaler, DatasetLabel::Validation)?,
        test: evaluate(&model, &bundle.test, &bundle.scaler, DatasetLabel::Test)?,
        model,
    })
}

fn summarize(values: impl Iterator<Item = f64>, metric: String) -> Result<MetricSummary> {
    let samples: Vec<f64> = values.collect();
    let (mean, half_width) = confidence_interval(&samples)?;
    Ok(MetricSummary { metric, mean, half_width })
}

/// Trains `config.trials` models with seeds `base_seed + k` and summarises
/// their RMSE in PM2.5 units.
///
/// A shuffled split also reshuffles the training windows every epoch unless
/// `config.shuffle_seed` is already set. Diverged trials are kept in the
/// records and left out of the summary; any other trial error aborts the run.
pub fn run_trials(bundle: &DataBundle, spec: &ModelSpec, config: &TrainingConfig, execution: Execution) -> Result<ExperimentRun> {
    config.validate()?;
    spec.validate()?;
    let mut config = config.clone();
    if bundle.split.strategy == Strategy::Shuffled && config.shuffle_seed.is_none() {
        config.shuffle_seed = bundle.split.shuffle_seed;
    }
    let seeds: Vec<u64> = (0..config.trials as u64).map(|k| config.base_seed.wrapping_add(k)).collect();
    let task = |&seed: &u64| TrialRecord { seed, outcome: run_one(bundle, spec, &config, seed) };
    let records: Vec<TrialRecord> = match execution {
        Execution::Serial => seeds.iter().map(task).collect(),
        Execution::Parallel(None) => seeds.par_iter().map(task).collect(),
        Execution::Parallel(Some(threads)) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| seeds.par_iter().map(task).collect()),
    };

    let mut done = Vec::new();
    let mut diverged = 0;
    for record in &records {
        match &record.outcome {
            Ok(m) => done.push(m),
            Err(Error::Divergence { .. }) => diverged += 1,
            Err(e) => return Err(e.clone()),
        }
    }
    if done.is_empty() {
        return Err(Error::InsufficientData(format!("all {diverged} trial(s) diverged")));
    }
    let mut rows = vec![
        summarize(done.iter().map(|m| m.train.overall_rmse), "Train".into())?,
        summarize(done.iter().map(|m| m.test.overall_rmse), "Test".into())?,
    ];
    for h in 0..spec.horizon {
        rows.push(summarize(done.iter().map(|m| m.test.per_horizon_rmse[h]), format!("Step-{}", h + 1))?);
    }
    let validation = summarize(done.iter().map(|m| m.validation.overall_rmse), "Validation".into())?;
    let summary = ExperimentSummary {
        rows,
        validation,
        trials: config.trials,
        completed: done.len(),
        diverged,
        seeds,
        config,
    };
    Ok(ExperimentRun { summary, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rmse;
    use crate::models::ModelKind;
    use crate::station::sinusoid_station;
    use crate::station::testing::origin;
    use crate::windowing::FeatureMode;
    use chrono::Duration;

    fn split(strategy: Strategy) -> SplitSpec {
        SplitSpec {
            train_end: origin() + Duration::hours(8 * 80),
            mode: FeatureMode::Multivariate,
            strategy,
            seasonal_months: None,
            shuffle_seed: (strategy == Strategy::Shuffled).then_some(9),
        }
    }

    fn bundle(strategy: Strategy) -> DataBundle {
        prepare_data(&sinusoid_station(120, origin()).unwrap(), 5, 3, &split(strategy), 2).unwrap()
    }

    fn spec() -> ModelSpec {
        ModelSpec::new(ModelKind::Lstm, 5, 11, 3).with_hidden(vec![4])
    }

    fn config(trials: usize) -> TrainingConfig {
        TrainingConfig { epochs: 3, trials, base_seed: 40, ..TrainingConfig::default() }
    }

    #[test]
    fn scaler_fit_only_on_training_rows() {
        let raw = sinusoid_station(120, origin()).unwrap();
        let b = bundle(Strategy::Plain);
        let pm = raw.require_feature("PM2.5").unwrap();
        let early: Vec<f64> = (0..80).map(|r| raw.get(r, pm).unwrap()).collect();
        let col = b.scaler.feature_index("PM2.5").unwrap();
        assert_eq!(b.scaler.min[col], early.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(b.scaler.max[col], early.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        // Windows ending before row 80: starts 0..=72.
        assert_eq!(b.train.len(), 73);
        // 113 windows in total, so 40 holdout windows split 20 / 20.
        assert_eq!((b.validation.len(), b.test.len()), (20, 20));
    }

    #[test]
    fn shuffled_training_windows_are_a_permutation() {
        let plain = bundle(Strategy::Plain);
        let shuffled = bundle(Strategy::Shuffled);
        let mut a = plain.train.window_start_indices().to_vec();
        let b = shuffled.train.window_start_indices().to_vec();
        assert_ne!(a, b);
        let mut sorted = b.clone();
        sorted.sort();
        a.sort();
        assert_eq!(a, sorted);
        assert_eq!(plain.test.window_start_indices(), shuffled.test.window_start_indices());
    }

    #[test]
    fn single_trial_has_zero_width() {
        let run = run_trials(&bundle(Strategy::Plain), &spec(), &config(1), Execution::Serial).unwrap();
        let s = &run.summary;
        assert_eq!((s.trials, s.completed, s.diverged, s.seeds.clone()), (1, 1, 0, vec![40]));
        let names: Vec<&str> = s.rows.iter().map(|r| r.metric.as_str()).collect();
        assert_eq!(names, ["Train", "Test", "Step-1", "Step-2", "Step-3"]);
        let m = run.records[0].outcome.as_ref().unwrap();
        assert_eq!(s.rows[0].mean, m.train.overall_rmse);
        assert_eq!(s.rows[3].mean, m.test.per_horizon_rmse[1]);
        assert!(s.rows.iter().all(|r| r.half_width == 0.0));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let b = bundle(Strategy::Shuffled);
        let serial = run_trials(&b, &spec(), &config(3), Execution::Serial).unwrap();
        let parallel = run_trials(&b, &spec(), &config(3), Execution::Parallel(Some(3))).unwrap();
        assert_eq!(serial.summary, parallel.summary);
        assert_eq!(serial.summary.config.shuffle_seed, Some(9));
        assert!(serial.summary.rows.iter().all(|r| r.half_width > 0.0));
    }

    #[test]
    fn metrics_are_in_concentration_units() {
        let b = bundle(Strategy::Plain);
        let run = run_trials(&b, &spec(), &config(1), Execution::Serial).unwrap();
        let m = run.records[0].outcome.as_ref().unwrap();
        let col = b.scaler.feature_index("PM2.5").unwrap();
        let preds = predict_batch(&m.model, &b.test).unwrap();
        let actual: Vec<f64> = b.test.targets().iter().map(|&v| b.scaler.unscale_value(col, v)).collect();
        let predicted: Vec<f64> = preds.scaled.iter().map(|&v| b.scaler.unscale_value(col, v)).collect();
        let brute = rmse(&actual, &predicted).unwrap();
        assert!((m.test.overall_rmse - brute).abs() < 1e-9 * brute);
        let scaled = rmse(b.test.targets(), &preds.scaled).unwrap();
        assert!(m.test.overall_rmse > 10.0 * scaled);
    }

    #[test]
    fn csv_layout() {
        let run = run_trials(&bundle(Strategy::Plain), &spec(), &config(1), Execution::Serial).unwrap();
        let mut buf = Vec::new();
        run.summary.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first: Vec<&str> = text.lines().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(first, ["metric", "Train", "Test", "Step-1", "Step-2", "Step-3"]);
    }
}
