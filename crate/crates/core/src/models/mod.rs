//! The four forecasting architectures and their train / predict contracts.

mod checkpoint;
mod network;
mod spec;
mod train;

pub use checkpoint::{load_model, save_model};
pub use network::{grad_check_network, BdLstmNet, EdLstmNet, Fnn, LayerSummary, LstmNet, Network};
pub use spec::{ModelKind, ModelSpec};
pub use train::{build_model, predict_batch, train, PredictionSet, TrainedModel, TrainingConfig};
