use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Fnn,
    Lstm,
    BdLstm,
    EdLstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Fnn, ModelKind::Lstm, ModelKind::BdLstm, ModelKind::EdLstm];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Fnn => "FNN",
            ModelKind::Lstm => "LSTM",
            ModelKind::BdLstm => "BDLSTM",
            ModelKind::EdLstm => "EDLSTM",
        }
    }

    /// Table-default hidden sizes.
    pub fn default_hidden(self) -> Vec<usize> {
        match self {
            ModelKind::Fnn => vec![64, 32],
            ModelKind::Lstm | ModelKind::BdLstm => vec![50],
            ModelKind::EdLstm => vec![50, 50],
        }
    }

    fn hidden_layer_count(self) -> usize {
        match self {
            ModelKind::Fnn | ModelKind::EdLstm => 2,
            ModelKind::Lstm | ModelKind::BdLstm => 1,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "FNN" => Ok(ModelKind::Fnn),
            "LSTM" => Ok(ModelKind::Lstm),
            "BDLSTM" => Ok(ModelKind::BdLstm),
            "EDLSTM" => Ok(ModelKind::EdLstm),
            _ => Err(Error::Config(format!("unknown model kind {s:?}"))),
        }
    }
}

/// Architecture of one model.
///
/// `hidden` holds the layer widths: FNN `(h1, h2)`, LSTM and BD-LSTM the cell
/// count per direction, ED-LSTM `(encoder, decoder)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub lookback: usize,
    pub input_features: usize,
    pub horizon: usize,
    pub hidden: Vec<usize>,
    /// Activation of the FNN hidden layers.
    pub hidden_activation: Activation,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, lookback: usize, input_features: usize, horizon: usize) -> Self {
        Self {
            kind,
            lookback,
            input_features,
            horizon,
            hidden: kind.default_hidden(),
            hidden_activation: Activation::Relu,
        }
    }

    pub fn with_hidden(mut self, hidden: Vec<usize>) -> Self {
        self.hidden = hidden;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lookback == 0 || self.input_features == 0 || self.horizon == 0 {
            return Err(Error::Shape(format!(
                "lookback {}, features {}, horizon {} must all be positive",
                self.lookback, self.input_features, self.horizon
            )));
        }
        if self.hidden.len() != self.kind.hidden_layer_count() {
            return Err(Error::Shape(format!(
                "{} takes {} hidden size(s), got {:?}",
                self.kind,
                self.kind.hidden_layer_count(),
                self.hidden
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Shape("hidden sizes must be positive".into()));
        }
        Ok(())
    }

    /// Flattened input width, `lookback × input_features`.
    pub fn input_width(&self) -> usize {
        self.lookback * self.input_features
    }
}
