//! LSTM layer with exact backpropagation through time.
//!
//! Standard formulation, per step t:
//!
//! ```text
//! i_t = sigmoid(W_i x_t + U_i h_{t-1} + b_i)
//! f_t = sigmoid(W_f x_t + U_f h_{t-1} + b_f)
//! g_t = tanh   (W_g x_t + U_g h_{t-1} + b_g)
//! o_t = sigmoid(W_o x_t + U_o h_{t-1} + b_o)
//! c_t = f_t * c_{t-1} + i_t * g_t
//! h_t = o_t * tanh(c_t)
//! ```
//!
//! The forward pass over a sequence records every activation needed for an
//! exact backward pass; no truncation is applied.

use rand::Rng;

use super::matrix::Matrix;
use crate::error::{Error, Result};

const GATE_I: usize = 0;
const GATE_F: usize = 1;
const GATE_G: usize = 2;
const GATE_O: usize = 3;
const GATE_NAMES: [&str; 4] = ["i", "f", "g", "o"];

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Hidden and cell vectors carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

#[derive(Debug, Clone)]
struct StepRecord {
    x: Vec<f64>,
    /// Post-nonlinearity gate activations, indexed by GATE_*.
    gates: [Vec<f64>; 4],
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

/// Activation record of one [`LstmLayer::forward_seq`] call.
#[derive(Debug, Clone)]
pub struct LstmCache {
    steps: Vec<StepRecord>,
    h0: Vec<f64>,
    c0: Vec<f64>,
}

impl LstmCache {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// One LSTM layer: four gates of input, recurrent, and bias parameters,
/// with gradient buffers alongside.
#[derive(Debug, Clone)]
pub struct LstmLayer {
    input_size: usize,
    hidden_size: usize,
    w: [Matrix; 4],
    u: [Matrix; 4],
    b: [Matrix; 4],
    dw: [Matrix; 4],
    du: [Matrix; 4],
    db: [Matrix; 4],
}

impl LstmLayer {
    /// Glorot-uniform weights, zero biases except the forget-gate bias,
    /// which starts at 1.0 to keep early gradients flowing.
    pub fn new<R: Rng>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let w = std::array::from_fn(|_| Matrix::glorot(hidden_size, input_size, rng));
        let u = std::array::from_fn(|_| Matrix::glorot(hidden_size, hidden_size, rng));
        let mut b: [Matrix; 4] = std::array::from_fn(|_| Matrix::zeros(hidden_size, 1));
        b[GATE_F].fill(1.0);
        LstmLayer {
            input_size,
            hidden_size,
            w,
            u,
            b,
            dw: std::array::from_fn(|_| Matrix::zeros(hidden_size, input_size)),
            du: std::array::from_fn(|_| Matrix::zeros(hidden_size, hidden_size)),
            db: std::array::from_fn(|_| Matrix::zeros(hidden_size, 1)),
        }
    }

    pub fn zeroed(input_size: usize, hidden_size: usize) -> Self {
        LstmLayer {
            input_size,
            hidden_size,
            w: std::array::from_fn(|_| Matrix::zeros(hidden_size, input_size)),
            u: std::array::from_fn(|_| Matrix::zeros(hidden_size, hidden_size)),
            b: std::array::from_fn(|_| Matrix::zeros(hidden_size, 1)),
            dw: std::array::from_fn(|_| Matrix::zeros(hidden_size, input_size)),
            du: std::array::from_fn(|_| Matrix::zeros(hidden_size, hidden_size)),
            db: std::array::from_fn(|_| Matrix::zeros(hidden_size, 1)),
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    fn gate_activations(&self, x: &[f64], h_prev: &[f64]) -> [Vec<f64>; 4] {
        let mut pre: [Vec<f64>; 4] = std::array::from_fn(|k| self.b[k].data().to_vec());
        for ((w, u), pre_k) in self.w.iter().zip(&self.u).zip(pre.iter_mut()) {
            w.matvec_acc(x, pre_k);
            u.matvec_acc(h_prev, pre_k);
        }
        for (k, gate) in pre.iter_mut().enumerate() {
            for v in gate.iter_mut() {
                *v = if k == GATE_G { v.tanh() } else { sigmoid(*v) };
            }
        }
        pre
    }

    /// Advance the state by one input without recording activations.
    pub fn step(&self, x: &[f64], state: &LstmState) -> LstmState {
        debug_assert_eq!(x.len(), self.input_size);
        let gates = self.gate_activations(x, &state.h);
        let mut c = vec![0.0; self.hidden_size];
        let mut h = vec![0.0; self.hidden_size];
        for j in 0..self.hidden_size {
            c[j] = gates[GATE_F][j] * state.c[j] + gates[GATE_I][j] * gates[GATE_G][j];
            h[j] = gates[GATE_O][j] * c[j].tanh();
        }
        LstmState { h, c }
    }

    /// Run the whole input sequence, returning the hidden vector of every
    /// step, the final state, and the cache for [`backward_seq`].
    ///
    /// [`backward_seq`]: LstmLayer::backward_seq
    pub fn forward_seq(
        &self,
        inputs: &[Vec<f64>],
        state0: &LstmState,
    ) -> Result<(Vec<Vec<f64>>, LstmState, LstmCache)> {
        if let Some(bad) = inputs.iter().find(|x| x.len() != self.input_size) {
            return Err(Error::contract(format!(
                "input width {} does not match layer input size {}",
                bad.len(),
                self.input_size
            )));
        }
        if state0.h.len() != self.hidden_size || state0.c.len() != self.hidden_size {
            return Err(Error::contract(format!(
                "state width {} does not match hidden size {}",
                state0.h.len(),
                self.hidden_size
            )));
        }

        let mut steps = Vec::with_capacity(inputs.len());
        let mut h_prev = state0.h.clone();
        let mut c_prev = state0.c.clone();
        for x in inputs {
            let gates = self.gate_activations(x, &h_prev);
            let mut c = vec![0.0; self.hidden_size];
            let mut tanh_c = vec![0.0; self.hidden_size];
            let mut h = vec![0.0; self.hidden_size];
            for j in 0..self.hidden_size {
                c[j] = gates[GATE_F][j] * c_prev[j] + gates[GATE_I][j] * gates[GATE_G][j];
                tanh_c[j] = c[j].tanh();
                h[j] = gates[GATE_O][j] * tanh_c[j];
            }
            steps.push(StepRecord {
                x: x.clone(),
                gates,
                c: c.clone(),
                tanh_c,
                h: h.clone(),
            });
            h_prev = h;
            c_prev = c;
        }

        let hiddens = steps.iter().map(|s| s.h.clone()).collect();
        let final_state = LstmState {
            h: h_prev,
            c: c_prev,
        };
        let cache = LstmCache {
            steps,
            h0: state0.h.clone(),
            c0: state0.c.clone(),
        };
        Ok((hiddens, final_state, cache))
    }

    /// Backpropagate through the recorded sequence. `dhidden[t]` is the loss
    /// gradient with respect to `h_t` coming from layers above; parameter
    /// gradients accumulate into this layer's buffers and the gradient with
    /// respect to each input is returned. Gradients that would flow into the
    /// initial state are discarded (the state is not a parameter here).
    pub fn backward_seq(&mut self, cache: &LstmCache, dhidden: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if dhidden.len() != cache.steps.len() {
            return Err(Error::contract(format!(
                "got {} hidden gradients for {} cached steps",
                dhidden.len(),
                cache.steps.len()
            )));
        }
        let n = self.hidden_size;
        let mut dxs = vec![vec![0.0; self.input_size]; cache.steps.len()];
        let mut dh_rec = vec![0.0; n];
        let mut dc_next = vec![0.0; n];
        let mut dpre: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);

        for t in (0..cache.steps.len()).rev() {
            let step = &cache.steps[t];
            let (h_prev, c_prev) = if t == 0 {
                (&cache.h0, &cache.c0)
            } else {
                (&cache.steps[t - 1].h, &cache.steps[t - 1].c)
            };

            let i = &step.gates[GATE_I];
            let f = &step.gates[GATE_F];
            let g = &step.gates[GATE_G];
            let o = &step.gates[GATE_O];

            for j in 0..n {
                let dh = dhidden[t][j] + dh_rec[j];
                let dc = dc_next[j] + dh * o[j] * (1.0 - step.tanh_c[j] * step.tanh_c[j]);
                let do_ = dh * step.tanh_c[j];
                dpre[GATE_O][j] = do_ * o[j] * (1.0 - o[j]);
                dpre[GATE_I][j] = dc * g[j] * i[j] * (1.0 - i[j]);
                dpre[GATE_F][j] = dc * c_prev[j] * f[j] * (1.0 - f[j]);
                dpre[GATE_G][j] = dc * i[j] * (1.0 - g[j] * g[j]);
                dc_next[j] = dc * f[j];
            }

            dh_rec.fill(0.0);
            #[allow(clippy::needless_range_loop)] // six arrays share the gate index
            for k in 0..4 {
                self.dw[k].add_outer(&dpre[k], &step.x);
                self.du[k].add_outer(&dpre[k], h_prev);
                for (db, &d) in self.db[k].data_mut().iter_mut().zip(dpre[k].iter()) {
                    *db += d;
                }
                self.w[k].tvec_acc(&dpre[k], &mut dxs[t]);
                self.u[k].tvec_acc(&dpre[k], &mut dh_rec);
            }
        }
        Ok(dxs)
    }

    pub fn zero_grads(&mut self) {
        for k in 0..4 {
            self.dw[k].fill(0.0);
            self.du[k].fill(0.0);
            self.db[k].fill(0.0);
        }
    }

    pub fn params_and_grads(&mut self) -> Vec<(&mut Matrix, &mut Matrix)> {
        let mut out = Vec::with_capacity(12);
        for (w, dw) in self.w.iter_mut().zip(self.dw.iter_mut()) {
            out.push((w, dw));
        }
        for (u, du) in self.u.iter_mut().zip(self.du.iter_mut()) {
            out.push((u, du));
        }
        for (b, db) in self.b.iter_mut().zip(self.db.iter_mut()) {
            out.push((b, db));
        }
        out
    }

    pub fn named_tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = Vec::with_capacity(12);
        for (k, name) in GATE_NAMES.iter().enumerate() {
            out.push((format!("w_{name}"), &self.w[k]));
        }
        for (k, name) in GATE_NAMES.iter().enumerate() {
            out.push((format!("u_{name}"), &self.u[k]));
        }
        for (k, name) in GATE_NAMES.iter().enumerate() {
            out.push((format!("b_{name}"), &self.b[k]));
        }
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut out = Vec::with_capacity(12);
        for (w, name) in self.w.iter_mut().zip(GATE_NAMES) {
            out.push((format!("w_{name}"), w));
        }
        for (w, name) in self.u.iter_mut().zip(GATE_NAMES) {
            out.push((format!("u_{name}"), w));
        }
        for (b, name) in self.b.iter_mut().zip(GATE_NAMES) {
            out.push((format!("b_{name}"), b));
        }
        out
    }
}
