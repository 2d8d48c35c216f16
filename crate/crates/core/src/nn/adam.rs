use serde::{Deserialize, Serialize};

use super::params::Parameters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adam moment estimates for a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(param_count: usize, config: AdamConfig) -> Self {
        Self { config, m: vec![0.0; param_count], v: vec![0.0; param_count], t: 0 }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step_slice(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam state for {} parameters got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.t += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = self.config;
        let c1 = 1.0 - beta1.powf(self.t as f64);
        let c2 = 1.0 - beta2.powf(self.t as f64);
        for k in 0..params.len() {
            let g = grads[k];
            self.m[k] = beta1 * self.m[k] + (1.0 - beta1) * g;
            self.v[k] = beta2 * self.v[k] + (1.0 - beta2) * g * g;
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }

    /// Adam update over a structured parameter set; `grads` has the same layout.
    pub fn step<P: Parameters>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let mut flat = params.to_flat();
        self.step_slice(&mut flat, &grads.to_flat())?;
        params.assign_flat(&flat)
    }
}
