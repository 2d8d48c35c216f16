use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{AdamConfig, AdamState, Parameters};
use crate::station::{ScalerParams, TARGET_FEATURE};
use crate::windowing::{permutation, WindowedDataset};

use super::network::Network;
use super::spec::ModelSpec;

/// Optimisation and trial settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub trials: usize,
    pub base_seed: u64,
    /// When set, every epoch visits the training windows in a fresh seeded
    /// order instead of chronological order.
    pub shuffle_seed: Option<u64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 20,
            adam: AdamConfig::default(),
            trials: 30,
            base_seed: 0,
            shuffle_seed: None,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// A network together with everything needed to reuse it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub network: Network,
    pub scaler: Option<ScalerParams>,
    pub loss_history: Vec<f64>,
    pub seed: u64,
}

/// Untrained model for `spec`, initialised from `seed`.
pub fn build_model(spec: &ModelSpec, seed: u64) -> Result<TrainedModel> {
    Ok(TrainedModel {
        spec: spec.clone(),
        network: Network::build(spec, seed)?,
        scaler: None,
        loss_history: Vec::new(),
        seed,
    })
}

impl TrainedModel {
    pub fn with_scaler(mut self, scaler: ScalerParams) -> Self {
        self.scaler = Some(scaler);
        self
    }

    pub fn predict_window(&self, window: &[f64]) -> Result<Vec<f64>> {
        self.network.predict(&self.spec, window)
    }

    /// Maps a scaled PM2.5 value back to concentration units.
    pub fn denormalize(&self, value: f64) -> Result<f64> {
        let scaler = self
            .scaler
            .as_ref()
            .ok_or_else(|| Error::Config("model has no scaler attached".into()))?;
        Ok(scaler.unscale_value(scaler.feature_index(TARGET_FEATURE)?, value))
    }
}

fn check_dataset(spec: &ModelSpec, data: &WindowedDataset) -> Result<()> {
    if data.features() != spec.input_features || data.lookback() != spec.lookback || data.horizon() != spec.horizon {
        return Err(Error::Shape(format!(
            "dataset ({} steps × {} features → {}) does not match model ({} × {} → {})",
            data.lookback(),
            data.features(),
            data.horizon(),
            spec.lookback,
            spec.input_features,
            spec.horizon
        )));
    }
    Ok(())
}

fn epoch_order(len: usize, shuffle_seed: Option<u64>, model_seed: u64, epoch: usize) -> Vec<usize> {
    match shuffle_seed {
        None => (0..len).collect(),
        Some(s) => {
            let mixed = s
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(model_seed.rotate_left(29))
                .wrapping_add(epoch as u64);
            permutation(len, mixed)
        }
    }
}

/// Minibatch Adam on the mean-over-batch MSE of all horizon outputs.
///
/// Runs `epochs × ceil(M / batch_size)` updates and appends each epoch's
/// mean window loss to `loss_history`.
pub fn train(mut model: TrainedModel, data: &WindowedDataset, config: &TrainingConfig) -> Result<TrainedModel> {
    config.validate()?;
    check_dataset(&model.spec, data)?;
    if config.epochs == 0 {
        return Ok(model);
    }
    if data.is_empty() {
        return Err(Error::InsufficientData("training set has no windows".into()));
    }
    let spec = model.spec.clone();
    let mut adam = AdamState::new(model.network.param_count(), config.adam);
    let mut grads = model.network.zeros_like();
    for epoch in 0..config.epochs {
        let order = epoch_order(data.len(), config.shuffle_seed, model.seed, epoch);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += model
                    .network
                    .accumulate_gradient(&spec, data.input(i), data.target(i), scale, &mut grads)?;
            }
            if !batch_loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            adam.step(&mut model.network, &grads)?;
            total += batch_loss;
        }
        let mean = total / data.len() as f64;
        if !mean.is_finite() || !model.network.to_flat().iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        model.loss_history.push(mean);
    }
    Ok(model)
}

/// Predictions for every window of a dataset, `M × horizon` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub horizon: usize,
    pub scaled: Vec<f64>,
    pub denormalized: Vec<f64>,
}

impl PredictionSet {
    pub fn len(&self) -> usize {
        self.scaled.len() / self.horizon
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scaled[i * self.horizon..(i + 1) * self.horizon]
    }
}

/// Predicts every window; the denormalized variant uses the model's PM2.5
/// scaler, or repeats the scaled values when the model has none.
pub fn predict_batch(model: &TrainedModel, data: &WindowedDataset) -> Result<PredictionSet> {
    check_dataset(&model.spec, data)?;
    let mut scaled = Vec::with_capacity(data.len() * model.spec.horizon);
    for i in 0..data.len() {
        scaled.extend(model.predict_window(data.input(i))?);
    }
    let denormalized = match &model.scaler {
        Some(_) => scaled.iter().map(|&v| model.denormalize(v)).collect::<Result<_>>()?,
        None => scaled.clone(),
    };
    Ok(PredictionSet { horizon: model.spec.horizon, scaled, denormalized })
}
