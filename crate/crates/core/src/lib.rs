//! Multi-step-ahead PM2.5 forecasting engine.
//!
//! The pipeline runs from station CSV ingestion through sliding-window
//! dataset construction, hand-written FNN / LSTM / bidirectional LSTM /
//! encoder-decoder LSTM models trained with Adam, to per-horizon RMSE
//! evaluation over repeated trials and recursive long-range forecasting.

pub mod error;
pub mod harness;
pub mod interval;
pub mod models;
pub mod nn;
pub mod station;
pub mod windowing;

pub use error::{Error, Result};
