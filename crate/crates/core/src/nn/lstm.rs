//! Standard (non-peephole) LSTM layer with backpropagation through time.
//!
//! Gate pre-activations are stacked in the order input, forget, candidate,
//! output:
//!
//! ```text
//! i = σ(W_i x + U_i h + b_i)      f = σ(W_f x + U_f h + b_f)
//! g = tanh(W_g x + U_g h + b_g)   o = σ(W_o x + U_o h + b_o)
//! c' = f ⊙ c + i ⊙ g              h' = o ⊙ tanh(c')
//! ```

use super::init::Initializer;
use super::matrix::Matrix;
use super::params::Parameters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Candidate = 2,
    Output = 3,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    /// 4H × I input weights, gate blocks stacked by row.
    pub w_input: Matrix,
    /// 4H × H recurrent weights.
    pub w_recurrent: Matrix,
    /// 4H biases.
    pub bias: Vec<f64>,
}

/// Intermediates of one forward pass, consumed by [`LstmLayer::backward_sequence`].
#[derive(Debug, Clone)]
pub struct LstmCache {
    input_size: usize,
    hidden_size: usize,
    inputs: Matrix,
    /// Activated gates per step, N × 4H.
    gates: Matrix,
    /// Cell states c_0..c_N, (N+1) × H.
    cells: Matrix,
    /// Hidden states h_0..h_N, (N+1) × H.
    hidden: Matrix,
    /// tanh(c_t) for t = 1..N, N × H.
    cells_tanh: Matrix,
}

impl LstmCache {
    pub fn steps(&self) -> usize {
        self.inputs.rows()
    }

    /// Input vector consumed at step `t`.
    pub fn input(&self, t: usize) -> &[f64] {
        self.inputs.row(t)
    }

    /// Activated value of `gate` at step `t`.
    pub fn gate(&self, t: usize, gate: Gate) -> &[f64] {
        let h = self.hidden_size;
        &self.gates.row(t)[gate as usize * h..(gate as usize + 1) * h]
    }
}

impl LstmLayer {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            w_input: Matrix::zeros(4 * hidden_size, input_size),
            w_recurrent: Matrix::zeros(4 * hidden_size, hidden_size),
            bias: vec![0.0; 4 * hidden_size],
        }
    }

    /// Weights from `U(-1/√fan_in, 1/√fan_in)` with `fan_in = I + H`; biases
    /// zero except the forget gate, which starts at 1.
    pub fn new(input_size: usize, hidden_size: usize, init: &mut Initializer) -> Result<Self> {
        if input_size == 0 || hidden_size == 0 {
            return Err(Error::Shape(format!("lstm layer {input_size} -> {hidden_size}")));
        }
        let mut layer = Self::zeros(input_size, hidden_size);
        let fan_in = input_size + hidden_size;
        init.fan_in_uniform(fan_in, layer.w_input.data_mut());
        init.fan_in_uniform(fan_in, layer.w_recurrent.data_mut());
        let h = hidden_size;
        layer.bias[Gate::Forget as usize * h..(Gate::Forget as usize + 1) * h].fill(1.0);
        Ok(layer)
    }

    pub fn input_size(&self) -> usize {
        self.w_input.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_recurrent.cols()
    }

    /// Rows of the input weight matrix belonging to `gate` (H × I, row-major).
    pub fn gate_input_weights(&self, gate: Gate) -> &[f64] {
        let (h, i) = (self.hidden_size(), self.input_size());
        &self.w_input.data()[gate as usize * h * i..(gate as usize + 1) * h * i]
    }

    pub fn gate_recurrent_weights(&self, gate: Gate) -> &[f64] {
        let h = self.hidden_size();
        &self.w_recurrent.data()[gate as usize * h * h..(gate as usize + 1) * h * h]
    }

    pub fn gate_bias(&self, gate: Gate) -> &[f64] {
        let h = self.hidden_size();
        &self.bias[gate as usize * h..(gate as usize + 1) * h]
    }

    /// Activated gates `[i, f, g, o]` for one step.
    fn gates(&self, x: &[f64], h_prev: &[f64], out: &mut [f64]) {
        let h = self.hidden_size();
        out.copy_from_slice(&self.bias);
        self.w_input.mul_vec_acc(x, out);
        self.w_recurrent.mul_vec_acc(h_prev, out);
        for (k, v) in out.iter_mut().enumerate() {
            *v = if k / h == Gate::Candidate as usize { v.tanh() } else { sigmoid(*v) };
        }
    }

    /// One recurrence step; returns `(h_t, c_t)`.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.hidden_size();
        if x.len() != self.input_size() || h_prev.len() != h || c_prev.len() != h {
            return Err(Error::Shape(format!(
                "lstm step expects x[{}], h[{h}], c[{h}]; got x[{}], h[{}], c[{}]",
                self.input_size(),
                x.len(),
                h_prev.len(),
                c_prev.len()
            )));
        }
        let mut gates = vec![0.0; 4 * h];
        self.gates(x, h_prev, &mut gates);
        let mut c = vec![0.0; h];
        let mut hidden = vec![0.0; h];
        for j in 0..h {
            let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
            c[j] = f * c_prev[j] + i * g;
            hidden[j] = o * c[j].tanh();
        }
        Ok((hidden, c))
    }

    /// Runs the layer over an N × I input sequence from zero state; returns
    /// the N × H hidden states.
    pub fn forward_sequence(&self, inputs: &Matrix) -> Result<(Matrix, LstmCache)> {
        let (n, h) = (inputs.rows(), self.hidden_size());
        if inputs.cols() != self.input_size() || n == 0 {
            return Err(Error::Shape(format!(
                "lstm expects a non-empty sequence of width {}, got {}x{}",
                self.input_size(),
                n,
                inputs.cols()
            )));
        }
        let mut gates = Matrix::zeros(n, 4 * h);
        let mut cells = Matrix::zeros(n + 1, h);
        let mut hidden = Matrix::zeros(n + 1, h);
        let mut cells_tanh = Matrix::zeros(n, h);
        for t in 0..n {
            self.gates(inputs.row(t), hidden.row(t), gates.row_mut(t));
            let g = gates.row(t);
            for j in 0..h {
                let c = g[h + j] * cells.get(t, j) + g[j] * g[2 * h + j];
                let tc = c.tanh();
                cells.set(t + 1, j, c);
                cells_tanh.set(t, j, tc);
                hidden.set(t + 1, j, g[3 * h + j] * tc);
            }
        }
        let outputs = Matrix::from_vec(n, h, hidden.data()[h..].to_vec())?;
        let cache = LstmCache {
            input_size: self.input_size(),
            hidden_size: h,
            inputs: inputs.clone(),
            gates,
            cells,
            hidden,
            cells_tanh,
        };
        Ok((outputs, cache))
    }

    /// Backpropagation through time. `d_hidden` (N × H) holds `∂L/∂h_t` from
    /// the layers above; parameter gradients are added into `grads` and the
    /// N × I input gradient is returned.
    pub fn backward_sequence(&self, cache: &LstmCache, d_hidden: &Matrix, grads: &mut LstmLayer) -> Result<Matrix> {
        let h = self.hidden_size();
        let n = cache.steps();
        if cache.hidden_size != h || cache.input_size != self.input_size() {
            return Err(Error::State("lstm cache was produced by a different layer shape".into()));
        }
        if d_hidden.shape() != (n, h) {
            return Err(Error::State(format!(
                "output gradient {}x{} does not match cached {n}x{h}",
                d_hidden.rows(),
                d_hidden.cols()
            )));
        }
        let mut d_inputs = Matrix::zeros(n, self.input_size());
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut d_pre = vec![0.0; 4 * h];
        for t in (0..n).rev() {
            let g = cache.gates.row(t);
            let tc = cache.cells_tanh.row(t);
            let c_prev = cache.cells.row(t);
            for j in 0..h {
                let (i, f, cand, o) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let dh = d_hidden.get(t, j) + dh_next[j];
                let dc = dc_next[j] + dh * o * (1.0 - tc[j] * tc[j]);
                d_pre[j] = dc * cand * i * (1.0 - i);
                d_pre[h + j] = dc * c_prev[j] * f * (1.0 - f);
                d_pre[2 * h + j] = dc * i * (1.0 - cand * cand);
                d_pre[3 * h + j] = dh * tc[j] * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            grads.w_input.add_outer(&d_pre, cache.inputs.row(t));
            grads.w_recurrent.add_outer(&d_pre, cache.hidden.row(t));
            for (b, d) in grads.bias.iter_mut().zip(&d_pre) {
                *b += d;
            }
            self.w_input.mul_vec_transposed_acc(&d_pre, d_inputs.row_mut(t));
            dh_next.fill(0.0);
            self.w_recurrent.mul_vec_transposed_acc(&d_pre, &mut dh_next);
        }
        Ok(d_inputs)
    }
}

impl Parameters for LstmLayer {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.w_input.data());
        f(self.w_recurrent.data());
        f(&self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.w_input.data_mut());
        f(self.w_recurrent.data_mut());
        f(&mut self.bias);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_parameters_fixed_point() {
        let layer = LstmLayer::zeros(3, 4);
        let (h, c) = layer.step(&[0.3, -2.0, 5.0], &[0.0; 4], &[0.0; 4]).unwrap();
        assert_eq!(h, vec![0.0; 4]);
        assert_eq!(c, vec![0.0; 4]);
    }

    #[test]
    fn saturated_forget_gate_keeps_cell() {
        let mut layer = LstmLayer::zeros(2, 3);
        layer.bias[3..6].fill(20.0);
        let (_, c) = layer.step(&[0.7, -0.4], &[0.0; 3], &[1.0; 3]).unwrap();
        for v in c {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn hand_evaluated_cell() {
        // H = 2, I = 1; row k of each block is (w_x, u_1, u_2, b).
        let mut layer = LstmLayer::zeros(1, 2);
        let wx = [0.1, -0.2, 0.3, 0.05, -0.15, 0.25, 0.2, -0.1];
        let u = [
            [0.01, 0.02], [0.03, -0.01], [-0.02, 0.04], [0.05, 0.0],
            [0.02, -0.03], [0.0, 0.01], [0.04, 0.02], [-0.01, 0.03],
        ];
        let b = [0.1, 0.0, 1.0, 0.5, 0.0, -0.1, 0.2, 0.3];
        for r in 0..8 {
            layer.w_input.set(r, 0, wx[r]);
            layer.w_recurrent.set(r, 0, u[r][0]);
            layer.w_recurrent.set(r, 1, u[r][1]);
            layer.bias[r] = b[r];
        }
        let x = 0.8;
        let h_prev = [0.3, -0.6];
        let c_prev = [0.5, -0.25];
        let (h, c) = layer.step(&[x], &h_prev, &c_prev).unwrap();

        let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
        let pre = |r: usize| wx[r] * x + u[r][0] * h_prev[0] + u[r][1] * h_prev[1] + b[r];
        for j in 0..2 {
            let i = sig(pre(j));
            let f = sig(pre(2 + j));
            let g = pre(4 + j).tanh();
            let o = sig(pre(6 + j));
            let c_expected = f * c_prev[j] + i * g;
            let h_expected = o * c_expected.tanh();
            assert!((c[j] - c_expected).abs() < 1e-12);
            assert!((h[j] - h_expected).abs() < 1e-12);
        }
    }

    #[test]
    fn init_bounds_and_forget_bias() {
        let layer = LstmLayer::new(11, 50, &mut Initializer::new(3)).unwrap();
        let bound = 1.0 / 61f64.sqrt();
        assert!(layer.w_input.data().iter().chain(layer.w_recurrent.data()).all(|w| w.abs() <= bound));
        assert!(layer.gate_bias(Gate::Forget).iter().all(|&b| b == 1.0));
        assert!(layer.gate_bias(Gate::Input).iter().all(|&b| b == 0.0));
        assert_eq!(layer.param_count(), 4 * (50 * 61 + 50));
        assert_eq!(layer.param_count(), 12_400);
        assert_eq!(layer, LstmLayer::new(11, 50, &mut Initializer::new(3)).unwrap());
        assert!(LstmLayer::new(0, 5, &mut Initializer::new(3)).is_err());
    }

    #[test]
    fn shape_errors() {
        let layer = LstmLayer::zeros(2, 3);
        assert!(matches!(layer.step(&[1.0], &[0.0; 3], &[0.0; 3]), Err(Error::Shape(_))));
        let (_, cache) = layer.forward_sequence(&Matrix::zeros(4, 2)).unwrap();
        let other = LstmLayer::zeros(2, 5);
        let mut grads = LstmLayer::zeros(2, 5);
        let err = other.backward_sequence(&cache, &Matrix::zeros(4, 5), &mut grads).unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let mut init = Initializer::new(9);
        let layer = LstmLayer::new(3, 4, &mut init).unwrap();
        let mut x = Matrix::zeros(5, 3);
        init.fan_in_uniform(1, x.data_mut());
        let (_, cache) = layer.forward_sequence(&x).unwrap();
        let mut grads = LstmLayer::zeros(3, 4);
        let dx = layer.backward_sequence(&cache, &Matrix::zeros(5, 4), &mut grads).unwrap();
        assert!(grads.to_flat().iter().all(|&g| g == 0.0));
        assert!(dx.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn sequence_matches_repeated_steps() {
        let mut init = Initializer::new(4);
        let layer = LstmLayer::new(2, 3, &mut init).unwrap();
        let mut x = Matrix::zeros(4, 2);
        init.fan_in_uniform(1, x.data_mut());
        let (out, _) = layer.forward_sequence(&x).unwrap();
        let (mut h, mut c) = (vec![0.0; 3], vec![0.0; 3]);
        for t in 0..4 {
            (h, c) = layer.step(x.row(t), &h, &c).unwrap();
            assert_eq!(out.row(t), h.as_slice());
        }
    }

    proptest! {
        #[test]
        fn gates_open_interval_and_finite_state(
            seed in any::<u64>(),
            xs in prop::collection::vec(-10.0f64..10.0, 2 * 6),
        ) {
            let layer = LstmLayer::new(2, 4, &mut Initializer::new(seed)).unwrap();
            let x = Matrix::from_vec(6, 2, xs).unwrap();
            let (out, cache) = layer.forward_sequence(&x).unwrap();
            for t in 0..6 {
                for gate in [Gate::Input, Gate::Forget, Gate::Output] {
                    prop_assert!(cache.gate(t, gate).iter().all(|&v| v > 0.0 && v < 1.0));
                }
            }
            prop_assert!(out.data().iter().all(|v| v.is_finite()));
        }
    }
}
