//! LSTM language model over the 25 chord classes.
//!
//! Two stacked LSTM layers with skip connections: the one-hot input feeds
//! both hidden layers and, together with every layer's hidden state, the
//! output projection. The output layer starts at zero, so an untrained model
//! predicts the uniform distribution.
//!
//! Training runs SGD with momentum, the learning rate falling linearly to
//! zero, key-shift augmentation drawn fresh at every presentation, and early
//! stopping on validation average log-probability. Long sequences are cut
//! into non-overlapping windows with a random phase offset each epoch;
//! sequences shorter than the window length simply contribute fewer loss
//! terms (nothing is padded, so no gradient can leak past a sequence end).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chord::{ClassId, NUM_CLASSES};
use crate::dataset::augment_shift;
use crate::error::{Error, Result};
use crate::neural::{
    log_softmax, softmax, softmax_ce_grad, Activation, Dense, DenseCache, HasTensors, LstmCache,
    LstmLayer, LstmState, Matrix, SgdMomentum,
};
use crate::temporal::TemporalModel;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct RnnLmConfig {
    pub num_layers: usize,
    pub hidden_size: usize,
    pub skip_connections: bool,
    /// Training window length in symbols.
    pub seq_len: usize,
    pub max_epochs: usize,
    pub lr0: f64,
    pub momentum: f64,
    pub batch_size: usize,
    /// Early-stopping patience in epochs without validation improvement.
    pub patience: usize,
    /// Random key-shift augmentation per presentation.
    pub augment: bool,
    pub clip_norm: f64,
}

impl Default for RnnLmConfig {
    fn default() -> Self {
        RnnLmConfig {
            num_layers: 2,
            hidden_size: 100,
            skip_connections: true,
            seq_len: 100,
            max_epochs: 200,
            lr0: 0.001,
            momentum: 0.9,
            batch_size: 8,
            patience: 20,
            augment: true,
            clip_norm: 5.0,
        }
    }
}

impl RnnLmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_layers", self.num_layers),
            ("hidden_size", self.hidden_size),
            ("seq_len", self.seq_len),
            ("max_epochs", self.max_epochs),
            ("batch_size", self.batch_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::contract(format!("{name} must be positive")));
            }
        }
        if !self.lr0.is_finite() || self.lr0 <= 0.0 || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::contract("lr0 must be > 0 and momentum in [0, 1)"));
        }
        Ok(())
    }

    fn layer_input_size(&self, layer: usize) -> usize {
        if layer == 0 {
            NUM_CLASSES
        } else if self.skip_connections {
            NUM_CLASSES + self.hidden_size
        } else {
            self.hidden_size
        }
    }

    fn feature_size(&self) -> usize {
        if self.skip_connections {
            NUM_CLASSES + self.num_layers * self.hidden_size
        } else {
            self.hidden_size
        }
    }
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Per-layer hidden and cell vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LmState {
    layers: Vec<LstmState>,
}

#[derive(Debug, Clone)]
pub struct RnnLm {
    config: RnnLmConfig,
    layers: Vec<LstmLayer>,
    output: Dense,
}

fn one_hot(class: ClassId) -> Vec<f64> {
    let mut x = vec![0.0; NUM_CLASSES];
    x[class.index()] = 1.0;
    x
}

impl RnnLm {
    /// LSTM weights are Glorot-initialized; the output projection starts at
    /// zero so the untrained model is exactly uniform.
    pub fn new<R: Rng>(config: RnnLmConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let layers = (0..config.num_layers)
            .map(|i| LstmLayer::new(config.layer_input_size(i), config.hidden_size, rng))
            .collect();
        let output = Dense::zeroed(config.feature_size(), NUM_CLASSES, Activation::Linear);
        Ok(RnnLm {
            config,
            layers,
            output,
        })
    }

    pub fn config(&self) -> &RnnLmConfig {
        &self.config
    }

    /// Mutable access to the output projection (tests randomize it).
    #[cfg(test)]
    pub(crate) fn output_layer_mut(&mut self) -> &mut Dense {
        &mut self.output
    }

    pub fn start_lm_state(&self) -> LmState {
        LmState {
            layers: self
                .layers
                .iter()
                .map(|l| LstmState::zeros(l.hidden_size()))
                .collect(),
        }
    }

    fn output_features(&self, x: &[f64], hiddens: &[&[f64]]) -> Vec<f64> {
        let mut feat = Vec::with_capacity(self.config.feature_size());
        if self.config.skip_connections {
            feat.extend_from_slice(x);
            for h in hiddens {
                feat.extend_from_slice(h);
            }
        } else {
            feat.extend_from_slice(hiddens[hiddens.len() - 1]);
        }
        feat
    }

    /// Advance one step: feed the previously emitted symbol (no-chord at the
    /// first step) and get the probability distribution over the next symbol.
    pub fn score_next(&self, state: &LmState, prev: ClassId) -> (Vec<f64>, LmState) {
        let (logits, next) = self.step_logits(state, prev);
        (softmax(&logits), next)
    }

    fn step_logits(&self, state: &LmState, prev: ClassId) -> (Vec<f64>, LmState) {
        let x = one_hot(prev);
        let mut new_layers = Vec::with_capacity(self.layers.len());
        let mut hiddens: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let input = if i == 0 {
                x.clone()
            } else if self.config.skip_connections {
                let mut v = x.clone();
                v.extend_from_slice(&hiddens[i - 1]);
                v
            } else {
                hiddens[i - 1].clone()
            };
            let next = layer.step(&input, &state.layers[i]);
            hiddens.push(next.h.clone());
            new_layers.push(next);
        }
        let hidden_refs: Vec<&[f64]> = hiddens.iter().map(Vec::as_slice).collect();
        let feat = self.output_features(&x, &hidden_refs);
        let logits = self.output.infer(&feat);
        (logits, LmState { layers: new_layers })
    }

    /// Log-probability of each symbol given its prefix, from one forward
    /// pass over the whole sequence.
    pub fn per_symbol_logprobs(&self, sequence: &[ClassId]) -> Vec<f64> {
        self.forward_sequence(sequence).target_logprobs
    }

    /// Total log-probability of the sequence under the model (the sum of
    /// [`per_symbol_logprobs`](RnnLm::per_symbol_logprobs)).
    pub fn sequence_logprob(&self, sequence: &[ClassId]) -> f64 {
        self.per_symbol_logprobs(sequence).iter().sum()
    }

    fn forward_sequence(&self, targets: &[ClassId]) -> SeqForward {
        let inputs: Vec<Vec<f64>> = std::iter::once(ClassId::NO_CHORD)
            .chain(targets.iter().copied())
            .take(targets.len())
            .map(one_hot)
            .collect();

        let mut layer_inputs = inputs.clone();
        let mut layer_caches: Vec<LstmCache> = Vec::with_capacity(self.layers.len());
        let mut layer_hiddens: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let (hs, _, cache) = layer
                .forward_seq(&layer_inputs, &LstmState::zeros(layer.hidden_size()))
                .expect("layer inputs are built to match");
            layer_caches.push(cache);
            if i + 1 < self.layers.len() {
                layer_inputs = if self.config.skip_connections {
                    inputs
                        .iter()
                        .zip(hs.iter())
                        .map(|(x, h)| {
                            let mut v = x.clone();
                            v.extend_from_slice(h);
                            v
                        })
                        .collect()
                } else {
                    hs.clone()
                };
            }
            layer_hiddens.push(hs);
        }

        let mut dense_caches = Vec::with_capacity(targets.len());
        let mut probs = Vec::with_capacity(targets.len());
        let mut target_logprobs = Vec::with_capacity(targets.len());
        for (t, &target) in targets.iter().enumerate() {
            let hidden_refs: Vec<&[f64]> =
                layer_hiddens.iter().map(|hs| hs[t].as_slice()).collect();
            let feat = self.output_features(&inputs[t], &hidden_refs);
            let (logits, cache) = self.output.forward(&feat);
            let logp = log_softmax(&logits);
            target_logprobs.push(logp[target.index()]);
            probs.push(softmax(&logits));
            dense_caches.push(cache);
        }

        SeqForward {
            layer_caches,
            dense_caches,
            probs,
            target_logprobs,
        }
    }

    /// Backward for one sequence: cross-entropy against each target symbol,
    /// every symbol weighted by `weight`. Gradients accumulate in place.
    fn backward_sequence(&mut self, targets: &[ClassId], forward: &SeqForward, weight: f64) {
        let steps = targets.len();
        let hidden = self.config.hidden_size;

        // dhidden[i][t]: gradient flowing into layer i's hidden output at t
        let mut dhidden: Vec<Vec<Vec<f64>>> =
            vec![vec![vec![0.0; hidden]; steps]; self.layers.len()];

        for (t, &target) in targets.iter().enumerate() {
            let dlogits = softmax_ce_grad(&forward.probs[t], target.index(), weight);
            let dfeat = self.output.backward(&forward.dense_caches[t], &dlogits);
            if self.config.skip_connections {
                // dfeat = [dx (unused: the input is one-hot) | dh_0 | dh_1 | ...]
                for (i, dh) in dhidden.iter_mut().enumerate() {
                    let lo = NUM_CLASSES + i * hidden;
                    for (dst, src) in dh[t].iter_mut().zip(&dfeat[lo..lo + hidden]) {
                        *dst += src;
                    }
                }
            } else {
                let last = dhidden.len() - 1;
                for (dst, src) in dhidden[last][t].iter_mut().zip(dfeat.iter()) {
                    *dst += src;
                }
            }
        }

        for i in (0..self.layers.len()).rev() {
            let dh = std::mem::take(&mut dhidden[i]);
            let dxs = self.layers[i]
                .backward_seq(&forward.layer_caches[i], &dh)
                .expect("cache and gradient lengths match");
            if i > 0 {
                // the tail of layer i's input gradient is layer i-1's hidden
                let offset = if self.config.skip_connections { NUM_CLASSES } else { 0 };
                for (t, dx) in dxs.iter().enumerate() {
                    for (dst, src) in dhidden[i - 1][t].iter_mut().zip(&dx[offset..]) {
                        *dst += src;
                    }
                }
            }
        }
    }

    fn zero_grads(&mut self) {
        for layer in &mut self.layers {
            layer.zero_grads();
        }
        self.output.zero_grads();
    }

    fn params_and_grads(&mut self) -> Vec<(&mut Matrix, &mut Matrix)> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            out.extend(layer.params_and_grads());
        }
        out.extend(self.output.params_and_grads());
        out
    }

    /// Copies of the current gradient buffers, in [`HasTensors`] order.
    pub fn grad_snapshot(&mut self) -> Vec<Matrix> {
        self.params_and_grads()
            .into_iter()
            .map(|(_, g)| g.clone())
            .collect()
    }

    /// Run forward+backward on one sequence (mean per-symbol cross-entropy)
    /// and leave the gradients in the buffers. Returns the loss.
    pub fn accumulate_gradients(&mut self, sequence: &[ClassId]) -> f64 {
        self.zero_grads();
        let forward = self.forward_sequence(sequence);
        let loss = mean_ce(&forward, sequence.len());
        self.backward_sequence(sequence, &forward, 1.0 / sequence.len() as f64);
        loss
    }

    /// Mean per-symbol cross-entropy of the model on one sequence.
    pub fn mean_loss(&self, sequence: &[ClassId]) -> f64 {
        let forward = self.forward_sequence(sequence);
        mean_ce(&forward, sequence.len())
    }
}

fn mean_ce(forward: &SeqForward, len: usize) -> f64 {
    -forward.target_logprobs.iter().sum::<f64>() / len as f64
}

struct SeqForward {
    layer_caches: Vec<LstmCache>,
    dense_caches: Vec<DenseCache>,
    probs: Vec<Vec<f64>>,
    target_logprobs: Vec<f64>,
}

impl TemporalModel for RnnLm {
    type State = LmState;

    fn start_state(&self) -> LmState {
        self.start_lm_state()
    }

    fn step(&self, state: &LmState, input: ClassId) -> ([f64; NUM_CLASSES], LmState) {
        let (logits, next) = self.step_logits(state, input);
        let logp = log_softmax(&logits);
        let mut dist = [0.0; NUM_CLASSES];
        dist.copy_from_slice(&logp);
        (dist, next)
    }
}

impl HasTensors for RnnLm {
    fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            names.extend(
                layer
                    .named_tensors()
                    .into_iter()
                    .map(|(n, _)| format!("l{i}.{n}")),
            );
        }
        names.extend(
            self.output
                .named_tensors()
                .into_iter()
                .map(|(n, _)| format!("out.{n}")),
        );
        names
    }

    fn tensors(&self) -> Vec<&Matrix> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend(layer.named_tensors().into_iter().map(|(_, m)| m));
        }
        out.extend(self.output.named_tensors().into_iter().map(|(_, m)| m));
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            out.extend(layer.named_tensors_mut().into_iter().map(|(_, m)| m));
        }
        out.extend(self.output.named_tensors_mut().into_iter().map(|(_, m)| m));
        out
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// Validation average log-probability per symbol of the kept checkpoint.
    pub best_val_logprob: f64,
    pub val_history: Vec<f64>,
}

/// Mean per-symbol log-probability over a set of sequences.
pub fn avg_symbol_logprob(model: &RnnLm, sequences: &[Vec<ClassId>]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for seq in sequences {
        if seq.is_empty() {
            continue;
        }
        total += model.sequence_logprob(seq);
        count += seq.len();
    }
    if count == 0 {
        f64::NEG_INFINITY
    } else {
        total / count as f64
    }
}

/// Train a language model on `train`, early-stopping on `validation`.
/// The returned model is the best-validation checkpoint (which may be the
/// untrained model if training never helps).
pub fn train<R: Rng>(
    train: &[Vec<ClassId>],
    validation: &[Vec<ClassId>],
    config: RnnLmConfig,
    rng: &mut R,
) -> Result<(RnnLm, TrainReport)> {
    config.validate()?;
    if train.iter().all(Vec::is_empty) {
        return Err(Error::contract("training corpus is empty"));
    }

    let mut model = RnnLm::new(config.clone(), rng)?;
    let mut optimizer = SgdMomentum::new(config.momentum, config.lr0, config.max_epochs);
    optimizer.clip_norm = Some(config.clip_norm);

    let mut best = model.clone();
    let mut best_val = avg_symbol_logprob(&model, validation);
    let mut best_epoch = 0usize;
    let mut val_history = vec![best_val];
    let mut stale = 0usize;
    let mut epochs_run = 0usize;

    for epoch in 0..config.max_epochs {
        epochs_run = epoch + 1;

        // Cut long sequences into windows at a fresh phase every epoch.
        let mut windows: Vec<Vec<ClassId>> = Vec::new();
        for seq in train {
            if seq.is_empty() {
                continue;
            }
            if seq.len() <= config.seq_len {
                windows.push(seq.clone());
            } else {
                let phase = rng.gen_range(0..config.seq_len);
                if phase > 0 {
                    windows.push(seq[..phase].to_vec());
                }
                for chunk in seq[phase..].chunks(config.seq_len) {
                    windows.push(chunk.to_vec());
                }
            }
        }
        windows.shuffle(rng);

        for (batch_idx, batch) in windows.chunks(config.batch_size).enumerate() {
            model.zero_grads();
            let total_symbols: usize = batch.iter().map(Vec::len).sum();
            let weight = 1.0 / total_symbols as f64;
            let mut batch_loss = 0.0;
            for window in batch {
                let presented = if config.augment {
                    augment_shift(window, rng)
                } else {
                    window.clone()
                };
                let forward = model.forward_sequence(&presented);
                batch_loss -= forward.target_logprobs.iter().sum::<f64>() * weight;
                model.backward_sequence(&presented, &forward, weight);
            }
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batch_idx,
                    reason: format!("loss = {batch_loss}"),
                });
            }
            optimizer
                .step(model.params_and_grads(), epoch)
                .map_err(|e| Error::Diverged {
                    epoch,
                    batch: batch_idx,
                    reason: e.to_string(),
                })?;
        }

        let val = avg_symbol_logprob(&model, validation);
        val_history.push(val);
        if val > best_val {
            best_val = val;
            best = model.clone();
            best_epoch = epoch + 1;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }

    Ok((
        best,
        TrainReport {
            epochs_run,
            best_epoch,
            best_val_logprob: best_val,
            val_history,
        },
    ))
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

impl RnnLm {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let cfg = &self.config;
        let meta = vec![
            ("kind".to_string(), "rnnlm".to_string()),
            ("num_layers".to_string(), cfg.num_layers.to_string()),
            ("hidden_size".to_string(), cfg.hidden_size.to_string()),
            ("skip_connections".to_string(), cfg.skip_connections.to_string()),
            ("seq_len".to_string(), cfg.seq_len.to_string()),
            ("max_epochs".to_string(), cfg.max_epochs.to_string()),
            ("lr0".to_string(), cfg.lr0.to_string()),
            ("momentum".to_string(), cfg.momentum.to_string()),
            ("batch_size".to_string(), cfg.batch_size.to_string()),
            ("patience".to_string(), cfg.patience.to_string()),
            ("augment".to_string(), cfg.augment.to_string()),
            ("clip_norm".to_string(), cfg.clip_norm.to_string()),
        ];
        let names = self.tensor_names();
        let tensors = self.tensors();
        let named: Vec<(String, &Matrix)> = names.into_iter().zip(tensors).collect();
        crate::neural::save_tensors(path, &meta, &named)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut file = crate::neural::load_tensors(path)?;
        let get = |key: &str| -> Result<String> {
            file.meta_value(key)
                .map(str::to_string)
                .ok_or_else(|| Error::contract(format!("checkpoint is missing meta key {key}")))
        };
        if get("kind")? != "rnnlm" {
            return Err(Error::contract("checkpoint is not an rnnlm model"));
        }
        let parse_err = |key: &str| Error::contract(format!("bad meta value for {key}"));
        let config = RnnLmConfig {
            num_layers: get("num_layers")?.parse().map_err(|_| parse_err("num_layers"))?,
            hidden_size: get("hidden_size")?.parse().map_err(|_| parse_err("hidden_size"))?,
            skip_connections: get("skip_connections")?
                .parse()
                .map_err(|_| parse_err("skip_connections"))?,
            seq_len: get("seq_len")?.parse().map_err(|_| parse_err("seq_len"))?,
            max_epochs: get("max_epochs")?.parse().map_err(|_| parse_err("max_epochs"))?,
            lr0: get("lr0")?.parse().map_err(|_| parse_err("lr0"))?,
            momentum: get("momentum")?.parse().map_err(|_| parse_err("momentum"))?,
            batch_size: get("batch_size")?.parse().map_err(|_| parse_err("batch_size"))?,
            patience: get("patience")?.parse().map_err(|_| parse_err("patience"))?,
            augment: get("augment")?.parse().map_err(|_| parse_err("augment"))?,
            clip_norm: get("clip_norm")?.parse().map_err(|_| parse_err("clip_norm"))?,
        };

        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut model = RnnLm::new(config, &mut rng)?;
        let names = model.tensor_names();
        for (name, tensor) in names.iter().zip(model.tensors_mut()) {
            let loaded = file
                .take_tensor(name)
                .ok_or_else(|| Error::contract(format!("checkpoint is missing tensor {name}")))?;
            if loaded.rows() != tensor.rows() || loaded.cols() != tensor.cols() {
                return Err(Error::contract(format!(
                    "tensor {name} has shape {}x{}, expected {}x{}",
                    loaded.rows(),
                    loaded.cols(),
                    tensor.rows(),
                    tensor.cols()
                )));
            }
            *tensor = loaded;
        }
        Ok(model)
    }
}
