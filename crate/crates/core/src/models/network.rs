use crate::error::{Error, Result};
use crate::nn::{mse_loss, Activation, Dense, Initializer, LstmCache, LstmLayer, Matrix, Parameters};

use super::spec::{ModelKind, ModelSpec};

/// Feedforward network over the flattened window.
#[derive(Debug, Clone, PartialEq)]
pub struct Fnn {
    pub layers: Vec<Dense>,
}

/// LSTM over the window, final hidden state projected to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmNet {
    pub lstm: LstmLayer,
    pub head: Dense,
}

/// Forward and reverse LSTMs; final states concatenated `[forward, backward]`
/// into one projection.
#[derive(Debug, Clone, PartialEq)]
pub struct BdLstmNet {
    pub forward: LstmLayer,
    pub backward: LstmLayer,
    pub head: Dense,
}

/// Encoder LSTM whose final state is repeated `horizon` times as the decoder
/// input; a shared `H → 1` projection maps every decoder step to one output.
#[derive(Debug, Clone, PartialEq)]
pub struct EdLstmNet {
    pub encoder: LstmLayer,
    pub decoder: LstmLayer,
    pub head: Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Network {
    Fnn(Fnn),
    Lstm(LstmNet),
    BdLstm(BdLstmNet),
    EdLstm(EdLstmNet),
}

/// One row of a parameter audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSummary {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub params: usize,
    pub detail: String,
}

pub(crate) enum Trace {
    Fnn { activations: Vec<Vec<f64>> },
    Lstm { cache: LstmCache, last: Vec<f64> },
    BdLstm { fwd: LstmCache, bwd: LstmCache, joined: Vec<f64> },
    EdLstm { enc: LstmCache, dec: LstmCache, dec_out: Matrix },
}

fn last_row(m: &Matrix) -> Vec<f64> {
    m.row(m.rows() - 1).to_vec()
}

impl Network {
    /// Builds a freshly initialised network for `spec` using `seed`.
    pub fn build(spec: &ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut init = Initializer::new(seed);
        let (f, out) = (spec.input_features, spec.horizon);
        Ok(match spec.kind {
            ModelKind::Fnn => {
                let mut layers = Vec::new();
                let mut width = spec.input_width();
                for &h in &spec.hidden {
                    layers.push(Dense::new(width, h, spec.hidden_activation, &mut init)?);
                    width = h;
                }
                layers.push(Dense::new(width, out, Activation::Identity, &mut init)?);
                Network::Fnn(Fnn { layers })
            }
            ModelKind::Lstm => {
                let h = spec.hidden[0];
                Network::Lstm(LstmNet {
                    lstm: LstmLayer::new(f, h, &mut init)?,
                    head: Dense::new(h, out, Activation::Identity, &mut init)?,
                })
            }
            ModelKind::BdLstm => {
                let h = spec.hidden[0];
                Network::BdLstm(BdLstmNet {
                    forward: LstmLayer::new(f, h, &mut init)?,
                    backward: LstmLayer::new(f, h, &mut init)?,
                    head: Dense::new(2 * h, out, Activation::Identity, &mut init)?,
                })
            }
            ModelKind::EdLstm => {
                let (he, hd) = (spec.hidden[0], spec.hidden[1]);
                Network::EdLstm(EdLstmNet {
                    encoder: LstmLayer::new(f, he, &mut init)?,
                    decoder: LstmLayer::new(he, hd, &mut init)?,
                    head: Dense::new(hd, 1, Activation::Identity, &mut init)?,
                })
            }
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Network::Fnn(_) => ModelKind::Fnn,
            Network::Lstm(_) => ModelKind::Lstm,
            Network::BdLstm(_) => ModelKind::BdLstm,
            Network::EdLstm(_) => ModelKind::EdLstm,
        }
    }

    /// Same shapes, all parameters zero. Used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill(0.0);
        z
    }

    /// Checks `window` (lookback × features, row-major) against `spec`.
    fn window_matrix(spec: &ModelSpec, window: &[f64]) -> Result<Matrix> {
        if window.len() != spec.input_width() {
            return Err(Error::Shape(format!(
                "window of {} values does not match {} × {}",
                window.len(),
                spec.lookback,
                spec.input_features
            )));
        }
        Matrix::from_vec(spec.lookback, spec.input_features, window.to_vec())
    }

    pub(crate) fn forward_traced(&self, spec: &ModelSpec, window: &[f64]) -> Result<(Vec<f64>, Trace)> {
        let x = Self::window_matrix(spec, window)?;
        match self {
            Network::Fnn(net) => {
                let mut activations = vec![window.to_vec()];
                for layer in &net.layers {
                    let next = layer.forward(activations.last().expect("non-empty"))?;
                    activations.push(next);
                }
                let out = activations.last().expect("non-empty").clone();
                Ok((out, Trace::Fnn { activations }))
            }
            Network::Lstm(net) => {
                let (hs, cache) = net.lstm.forward_sequence(&x)?;
                let last = last_row(&hs);
                Ok((net.head.forward(&last)?, Trace::Lstm { cache, last }))
            }
            Network::BdLstm(net) => {
                let (hf, fwd) = net.forward.forward_sequence(&x)?;
                let reversed = reverse_rows(&x);
                let (hb, bwd) = net.backward.forward_sequence(&reversed)?;
                let mut joined = last_row(&hf);
                joined.extend_from_slice(hb.row(hb.rows() - 1));
                Ok((net.head.forward(&joined)?, Trace::BdLstm { fwd, bwd, joined }))
            }
            Network::EdLstm(net) => {
                let (he, enc) = net.encoder.forward_sequence(&x)?;
                let state = last_row(&he);
                let mut repeated = Matrix::zeros(spec.horizon, state.len());
                for t in 0..spec.horizon {
                    repeated.row_mut(t).copy_from_slice(&state);
                }
                let (dec_out, dec) = net.decoder.forward_sequence(&repeated)?;
                let out = (0..spec.horizon)
                    .map(|t| net.head.forward(dec_out.row(t)).map(|v| v[0]))
                    .collect::<Result<Vec<_>>>()?;
                Ok((out, Trace::EdLstm { enc, dec, dec_out }))
            }
        }
    }

    pub fn predict(&self, spec: &ModelSpec, window: &[f64]) -> Result<Vec<f64>> {
        self.forward_traced(spec, window).map(|(out, _)| out)
    }

    /// Adds `∂L/∂θ` into `grads` for the given output gradient.
    pub(crate) fn backward(&self, trace: &Trace, d_out: &[f64], grads: &mut Network) -> Result<()> {
        match (self, trace, grads) {
            (Network::Fnn(net), Trace::Fnn { activations }, Network::Fnn(g)) => {
                let mut d = d_out.to_vec();
                for (k, layer) in net.layers.iter().enumerate().rev() {
                    d = layer.backward(&activations[k], &activations[k + 1], &d, &mut g.layers[k])?;
                }
                Ok(())
            }
            (Network::Lstm(net), Trace::Lstm { cache, last }, Network::Lstm(g)) => {
                let out = net.head.forward(last)?;
                let d_last = net.head.backward(last, &out, d_out, &mut g.head)?;
                let d_hidden = last_step_gradient(cache.steps(), &d_last);
                net.lstm.backward_sequence(cache, &d_hidden, &mut g.lstm)?;
                Ok(())
            }
            (Network::BdLstm(net), Trace::BdLstm { fwd, bwd, joined }, Network::BdLstm(g)) => {
                let out = net.head.forward(joined)?;
                let d_joined = net.head.backward(joined, &out, d_out, &mut g.head)?;
                let h = net.forward.hidden_size();
                net.forward
                    .backward_sequence(fwd, &last_step_gradient(fwd.steps(), &d_joined[..h]), &mut g.forward)?;
                net.backward
                    .backward_sequence(bwd, &last_step_gradient(bwd.steps(), &d_joined[h..]), &mut g.backward)?;
                Ok(())
            }
            (Network::EdLstm(net), Trace::EdLstm { enc, dec, dec_out }, Network::EdLstm(g)) => {
                let steps = dec_out.rows();
                let mut d_dec = Matrix::zeros(steps, net.decoder.hidden_size());
                for t in 0..steps {
                    let y = net.head.forward(dec_out.row(t))?;
                    let d = net.head.backward(dec_out.row(t), &y, &d_out[t..t + 1], &mut g.head)?;
                    d_dec.row_mut(t).copy_from_slice(&d);
                }
                let d_repeated = net.decoder.backward_sequence(dec, &d_dec, &mut g.decoder)?;
                let mut d_state = vec![0.0; net.encoder.hidden_size()];
                for t in 0..steps {
                    crate::nn::axpy(1.0, d_repeated.row(t), &mut d_state);
                }
                net.encoder
                    .backward_sequence(enc, &last_step_gradient(enc.steps(), &d_state), &mut g.encoder)?;
                Ok(())
            }
            _ => Err(Error::State("trace or gradient buffer belongs to a different model kind".into())),
        }
    }

    /// MSE loss for one window; adds `scale · ∂loss/∂θ` into `grads`.
    pub fn accumulate_gradient(
        &self,
        spec: &ModelSpec,
        window: &[f64],
        target: &[f64],
        scale: f64,
        grads: &mut Network,
    ) -> Result<f64> {
        let (out, trace) = self.forward_traced(spec, window)?;
        let (loss, mut d_out) = mse_loss(&out, target)?;
        for d in &mut d_out {
            *d *= scale;
        }
        self.backward(&trace, &d_out, grads)?;
        Ok(loss)
    }

    pub fn describe(&self, spec: &ModelSpec) -> Vec<LayerSummary> {
        let dense = |name: String, d: &Dense| LayerSummary {
            name,
            inputs: d.inputs(),
            outputs: d.outputs(),
            params: d.param_count(),
            detail: format!("{:?}", d.activation).to_lowercase(),
        };
        let lstm = |name: &str, l: &LstmLayer, steps: usize| LayerSummary {
            name: name.to_string(),
            inputs: l.input_size(),
            outputs: l.hidden_size(),
            params: l.param_count(),
            detail: format!("{steps} steps"),
        };
        match self {
            Network::Fnn(net) => net
                .layers
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    let name = if k + 1 == net.layers.len() { "output".into() } else { format!("dense{}", k + 1) };
                    dense(name, d)
                })
                .collect(),
            Network::Lstm(net) => vec![lstm("lstm", &net.lstm, spec.lookback), dense("output".into(), &net.head)],
            Network::BdLstm(net) => vec![
                lstm("lstm_forward", &net.forward, spec.lookback),
                lstm("lstm_backward", &net.backward, spec.lookback),
                dense("output".into(), &net.head),
            ],
            Network::EdLstm(net) => vec![
                lstm("encoder", &net.encoder, spec.lookback),
                LayerSummary {
                    name: "repeat".into(),
                    inputs: net.encoder.hidden_size(),
                    outputs: net.encoder.hidden_size(),
                    params: 0,
                    detail: format!("x{}", spec.horizon),
                },
                lstm("decoder", &net.decoder, spec.horizon),
                LayerSummary {
                    detail: format!("time-distributed x{}", spec.horizon),
                    ..dense("output".into(), &net.head)
                },
            ],
        }
    }
}

fn reverse_rows(m: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for r in 0..m.rows() {
        out.row_mut(r).copy_from_slice(m.row(m.rows() - 1 - r));
    }
    out
}

/// N × H gradient that is zero except for the final step.
fn last_step_gradient(steps: usize, d_last: &[f64]) -> Matrix {
    let mut d = Matrix::zeros(steps, d_last.len());
    d.row_mut(steps - 1).copy_from_slice(d_last);
    d
}

impl Parameters for Network {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        match self {
            Network::Fnn(n) => n.layers.iter().for_each(|l| l.visit(f)),
            Network::Lstm(n) => {
                n.lstm.visit(f);
                n.head.visit(f);
            }
            Network::BdLstm(n) => {
                n.forward.visit(f);
                n.backward.visit(f);
                n.head.visit(f);
            }
            Network::EdLstm(n) => {
                n.encoder.visit(f);
                n.decoder.visit(f);
                n.head.visit(f);
            }
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        match self {
            Network::Fnn(n) => n.layers.iter_mut().for_each(|l| l.visit_mut(f)),
            Network::Lstm(n) => {
                n.lstm.visit_mut(f);
                n.head.visit_mut(f);
            }
            Network::BdLstm(n) => {
                n.forward.visit_mut(f);
                n.backward.visit_mut(f);
                n.head.visit_mut(f);
            }
            Network::EdLstm(n) => {
                n.encoder.visit_mut(f);
                n.decoder.visit_mut(f);
                n.head.visit_mut(f);
            }
        }
    }
}

/// Largest relative error between backpropagated and central-difference
/// gradients of the single-window MSE.
pub fn grad_check_network(net: &Network, spec: &ModelSpec, window: &[f64], target: &[f64], eps: f64) -> Result<f64> {
    let mut analytic = net.zeros_like();
    net.accumulate_gradient(spec, window, target, 1.0, &mut analytic)?;
    let mut probe = net.clone();
    let mut failure = None;
    let err = crate::nn::grad_check(&mut probe, &analytic, eps, |p| {
        match p.predict(spec, window).and_then(|out| mse_loss(&out, target)) {
            Ok((loss, _)) => loss,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(err),
    }
}
