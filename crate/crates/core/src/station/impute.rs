use crate::error::{Error, Result};

use super::TimeSeriesFrame;

/// Default neighbour radius for [`impute_neighbor_median`].
pub const DEFAULT_IMPUTE_RADIUS: usize = 2;

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fills each missing entry with the median of the available values within
/// `k` rows on either side in the same column.
///
/// Only values present in the input are consulted, so the result does not
/// depend on the order in which gaps are filled.
pub fn impute_neighbor_median(frame: &TimeSeriesFrame, k: usize) -> Result<TimeSeriesFrame> {
    if k == 0 {
        return Err(Error::Config("imputation radius must be at least 1".into()));
    }
    let (rows, cols) = (frame.rows(), frame.cols());
    let mut out = frame.values().to_vec();
    let mut neighbours = Vec::with_capacity(2 * k);
    for t in 0..rows {
        for f in 0..cols {
            if frame.get(t, f).is_some() {
                continue;
            }
            neighbours.clear();
            let lo = t.saturating_sub(k);
            let hi = (t + k).min(rows - 1);
            neighbours.extend((lo..=hi).filter(|&r| r != t).filter_map(|r| frame.get(r, f)));
            if neighbours.is_empty() {
                return Err(Error::Imputation {
                    row: t,
                    feature: frame.feature_names()[f].clone(),
                });
            }
            out[t * cols + f] = Some(median(&mut neighbours));
        }
    }
    Ok(frame.with_values(out))
}
