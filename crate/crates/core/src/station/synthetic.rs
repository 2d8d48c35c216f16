//! Deterministic synthetic stations for demos and tests.
//!
//! Both generators fill all twelve schema columns. PM2.5 carries the signal;
//! every other feature is a lagged, rescaled copy of it, so multivariate
//! models see informative inputs.

use chrono::NaiveDateTime;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Normal};

use super::frame::{TimeSeriesFrame, STATION_FEATURES, TARGET_FEATURE};
use super::eight_hourly;
use crate::error::{Error, Result};

/// Longest lag used for the non-target columns.
const MAX_LAG: usize = 11;

fn assemble(name: &str, start: NaiveDateTime, rows: usize, signal: &[f64]) -> Result<TimeSeriesFrame> {
    debug_assert_eq!(signal.len(), rows + MAX_LAG);
    let columns = STATION_FEATURES
        .iter()
        .enumerate()
        .map(|(j, feature)| {
            let column = if *feature == TARGET_FEATURE {
                signal[MAX_LAG..].to_vec()
            } else {
                let lag = j + 1;
                let gain = 1.0 + 0.1 * j as f64;
                (0..rows).map(|t| gain * signal[MAX_LAG + t - lag] + 5.0 * j as f64).collect()
            };
            (feature.to_string(), column)
        })
        .collect();
    TimeSeriesFrame::from_columns(name, eight_hourly(start, rows), columns)
}

/// Noiseless `100 + 40 sin(2πt/21) + 25 sin(2πt/9)` PM2.5 series.
pub fn sinusoid_station(rows: usize, start: NaiveDateTime) -> Result<TimeSeriesFrame> {
    use std::f64::consts::TAU;
    let signal: Vec<f64> = (0..rows + MAX_LAG)
        .map(|i| {
            let t = i as f64 - MAX_LAG as f64;
            100.0 + 40.0 * (TAU * t / 21.0).sin() + 25.0 * (TAU * t / 9.0).sin()
        })
        .collect();
    assemble("synthetic-sinusoid", start, rows, &signal)
}

/// `x_t = φ x_{t-1} + e_t` with Gaussian `e_t`, reported as `100 + 20 x_t`.
pub fn ar1_station(rows: usize, phi: f64, noise_sd: f64, seed: u64, start: NaiveDateTime) -> Result<TimeSeriesFrame> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::Config(format!("noise standard deviation {noise_sd} must be finite and ≥ 0")));
    }
    let normal = Normal::new(0.0, noise_sd).map_err(|e| Error::Config(format!("noise: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    // Burn-in so the series starts near stationarity.
    for _ in 0..100 {
        x = phi * x + normal.sample(&mut rng);
    }
    let signal: Vec<f64> = (0..rows + MAX_LAG)
        .map(|_| {
            x = phi * x + normal.sample(&mut rng);
            100.0 + 20.0 * x
        })
        .collect();
    assemble("synthetic-ar1", start, rows, &signal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::station::testing::origin;

    #[test]
    fn shapes_and_lags() {
        let f = sinusoid_station(50, origin()).unwrap();
        assert_eq!((f.rows(), f.cols(), f.missing_count()), (50, 12, 0));
        let pm = f.require_feature(TARGET_FEATURE).unwrap();
        // PM10 (column 0) is PM2.5 one step earlier.
        assert!((f.get(10, 0).unwrap() - f.get(9, pm).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ar1_is_seeded() {
        let a = ar1_station(40, 0.9, 0.5, 3, origin()).unwrap();
        assert_eq!(a, ar1_station(40, 0.9, 0.5, 3, origin()).unwrap());
        assert_ne!(a, ar1_station(40, 0.9, 0.5, 4, origin()).unwrap());
        assert!(ar1_station(40, 0.9, -1.0, 3, origin()).is_err());
    }
}
