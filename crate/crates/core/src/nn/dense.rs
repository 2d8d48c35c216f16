use serde::{Deserialize, Serialize};

use super::init::Initializer;
use super::matrix::Matrix;
use super::params::Parameters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer `y = act(W x + b)` with `W` of shape out × in.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self { weights: Matrix::zeros(outputs, inputs), bias: vec![0.0; outputs], activation }
    }

    pub fn new(inputs: usize, outputs: usize, activation: Activation, init: &mut Initializer) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::Shape(format!("dense layer {inputs} -> {outputs}")));
        }
        let mut layer = Self::zeros(inputs, outputs, activation);
        init.fan_in_uniform(inputs, layer.weights.data_mut());
        Ok(layer)
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs() {
            return Err(Error::Shape(format!(
                "dense layer expects {} inputs, got {}",
                self.inputs(),
                x.len()
            )));
        }
        let mut y = self.bias.clone();
        self.weights.mul_vec_acc(x, &mut y);
        for v in &mut y {
            *v = self.activation.apply(*v);
        }
        Ok(y)
    }

    /// Accumulates parameter gradients into `grads` given the forward input
    /// `x`, output `y`, and `d_y = ∂L/∂y`; returns `∂L/∂x`.
    pub fn backward(&self, x: &[f64], y: &[f64], d_y: &[f64], grads: &mut Dense) -> Result<Vec<f64>> {
        if y.len() != self.outputs() || d_y.len() != self.outputs() || x.len() != self.inputs() {
            return Err(Error::State("dense backward called with mismatched cache".into()));
        }
        let d_pre: Vec<f64> = d_y
            .iter()
            .zip(y)
            .map(|(g, &out)| g * self.activation.derivative_from_output(out))
            .collect();
        grads.weights.add_outer(&d_pre, x);
        for (b, d) in grads.bias.iter_mut().zip(&d_pre) {
            *b += d;
        }
        let mut d_x = vec![0.0; self.inputs()];
        self.weights.mul_vec_transposed_acc(&d_pre, &mut d_x);
        Ok(d_x)
    }
}

impl Parameters for Dense {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.weights.data());
        f(&self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.weights.data_mut());
        f(&mut self.bias);
    }
}
