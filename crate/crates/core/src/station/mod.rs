//! Station data: CSV ingestion, gap repair, scaling and descriptive statistics.

mod frame;
mod impute;
mod scale;
mod stats;
mod synthetic;

pub use frame::{
    format_timestamp, parse_station_csv, parse_timestamp, write_station_csv, TimeSeriesFrame,
    STATION_FEATURES, TARGET_FEATURE, TIMESTAMP_FORMAT,
};
pub use impute::{impute_neighbor_median, DEFAULT_IMPUTE_RADIUS};
pub use scale::{minmax_apply, minmax_fit, minmax_invert, ScalerParams};
pub use stats::{pearson_matrix, period_stats, seasonal_slice, CorrelationMatrix, PeriodSummary};
pub use synthetic::{ar1_station, sinusoid_station};

/// Observation cadence of station data, in hours.
pub const CADENCE_HOURS: i64 = 8;

/// `count` timestamps spaced by the station cadence, starting at `start`.
pub fn eight_hourly(start: chrono::NaiveDateTime, count: usize) -> Vec<chrono::NaiveDateTime> {
    (0..count)
        .map(|i| start + chrono::Duration::hours(CADENCE_HOURS * i as i64))
        .collect()
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use chrono::NaiveDate;

    pub use super::eight_hourly;

    pub fn origin() -> chrono::NaiveDateTime {
        NaiveDate::from_ymd_opt(2019, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    pub fn frame_with_column(values: &[Option<f64>]) -> TimeSeriesFrame {
        TimeSeriesFrame::new("test", eight_hourly(origin(), values.len()), vec!["x".into()], values.to_vec())
            .unwrap()
    }

    pub fn frame_with_columns(columns: Vec<(&str, Vec<f64>)>) -> TimeSeriesFrame {
        let rows = columns[0].1.len();
        TimeSeriesFrame::from_columns(
            "test",
            eight_hourly(origin(), rows),
            columns.into_iter().map(|(n, c)| (n.to_string(), c)).collect(),
        )
        .unwrap()
    }
}
