//! Evaluation protocol: per-horizon RMSE, repeated-trial summaries with 95%
//! intervals, and recursive forecasting with uncertainty bands.

mod forecast;
mod metrics;
mod trials;

pub use crate::interval::confidence_interval;
pub use forecast::{forecast_with_uncertainty, recursive_forecast, seed_window, ForecastResult, Forecaster, Trajectory};
pub use metrics::{horizon_rmse, rmse, spearman, DatasetLabel, HorizonMetrics};
pub use trials::{
    prepare_data, run_trials, DataBundle, Execution, ExperimentRun, ExperimentSummary, MetricSummary, TrialMetrics,
    TrialRecord,
};
