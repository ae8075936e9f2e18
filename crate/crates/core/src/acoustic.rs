//! Frame-level acoustic models and a synthetic stand-in for audio.
//!
//! Two classifiers map per-frame feature vectors to posteriors over the 25
//! chord classes: plain logistic regression and a multilayer perceptron with
//! rectifier hidden layers. Both train with mini-batch SGD plus momentum and
//! keep the best-validation checkpoint.
//!
//! Since no audio front end exists here, [`synth_corpus`] fabricates corpora
//! with known ground truth: chord progressions with geometric durations,
//! emitted as one-hot class templates plus Gaussian noise. The noise level
//! dials the Bayes-optimal frame accuracy, which is what decoder experiments
//! need to vary.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::chord::{ClassId, NUM_CLASSES};
use crate::dataset::{AnnotationTrack, FrameSequence};
use crate::error::{Error, Result};
use crate::neural::{
    cross_entropy, log_softmax, softmax, softmax_ce_grad, Activation, Dense, Matrix, SgdMomentum,
};
use crate::FRAME_RATE_HZ;

// ---------------------------------------------------------------------------
// Feature and posterior containers
// ---------------------------------------------------------------------------

/// Per-frame feature vectors, row-major `frames x dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    frames: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(frames: usize, dim: usize) -> Self {
        FeatureMatrix {
            frames,
            dim,
            data: vec![0.0; frames * dim],
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.data[frame * self.dim..(frame + 1) * self.dim]
    }

    pub fn row_mut(&mut self, frame: usize) -> &mut [f64] {
        &mut self.data[frame * self.dim..(frame + 1) * self.dim]
    }
}

/// Per-frame distributions over the 25 classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    frames: usize,
    data: Vec<f64>,
}

impl PosteriorMatrix {
    /// Build from rows, requiring each to sum to 1 within 1e-9.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows_with_tol(rows, 1e-9)
    }

    fn from_rows_with_tol(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != NUM_CLASSES {
                return Err(Error::contract(format!(
                    "posterior row {i} has {} entries, expected {NUM_CLASSES}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::contract(format!(
                    "posterior row {i} has an invalid entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::contract(format!(
                    "posterior row {i} sums to {sum}, expected 1 within {tol}"
                )));
            }
        }
        Ok(PosteriorMatrix {
            frames: rows.len(),
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.data[frame * NUM_CLASSES..(frame + 1) * NUM_CLASSES]
    }

    /// Frame-wise argmax labels.
    pub fn argmax_frames(&self) -> FrameSequence {
        let classes = (0..self.frames)
            .map(|t| {
                let row = self.row(t);
                let mut best = 0usize;
                for (j, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = j;
                    }
                }
                ClassId::new(best as u8).unwrap()
            })
            .collect();
        FrameSequence { classes }
    }
}

// ---------------------------------------------------------------------------
// Classifiers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    /// Softmax regression straight from the features.
    LogReg,
    /// Rectifier MLP; layer count and width from the config.
    Mlp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub hidden_layers: usize,
    pub hidden_size: usize,
    pub max_epochs: usize,
    pub lr0: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub clip_norm: f64,
}

impl ClassifierConfig {
    pub fn logreg() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::LogReg,
            hidden_layers: 0,
            hidden_size: 0,
            max_epochs: 50,
            lr0: 0.05,
            momentum: 0.9,
            batch_size: 64,
            patience: 10,
            clip_norm: 5.0,
        }
    }

    /// 3 fully connected hidden layers of 256 rectifier units.
    pub fn mlp() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::Mlp,
            hidden_layers: 3,
            hidden_size: 256,
            ..Self::logreg()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.kind == ClassifierKind::Mlp && (self.hidden_layers == 0 || self.hidden_size == 0) {
            return Err(Error::contract("an MLP needs hidden layers and units"));
        }
        if self.max_epochs == 0 || self.batch_size == 0 {
            return Err(Error::contract("max_epochs and batch_size must be positive"));
        }
        Ok(())
    }
}

/// Frame classifier: zero or more rectifier layers, then a softmax readout.
#[derive(Debug, Clone)]
pub struct FrameClassifier {
    kind: ClassifierKind,
    hidden: Vec<Dense>,
    output: Dense,
}

impl FrameClassifier {
    pub fn new<R: Rng>(input_dim: usize, config: &ClassifierConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let mut hidden = Vec::new();
        let mut width = input_dim;
        if config.kind == ClassifierKind::Mlp {
            for _ in 0..config.hidden_layers {
                hidden.push(Dense::new(width, config.hidden_size, Activation::Relu, rng));
                width = config.hidden_size;
            }
        }
        // zero readout: the untrained classifier is exactly uniform
        let output = Dense::zeroed(width, NUM_CLASSES, Activation::Linear);
        Ok(FrameClassifier {
            kind: config.kind,
            hidden,
            output,
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn input_dim(&self) -> usize {
        self.hidden
            .first()
            .map_or(self.output.input_size(), Dense::input_size)
    }

    fn logits(&self, features: &[f64]) -> Vec<f64> {
        let mut x = features.to_vec();
        for layer in &self.hidden {
            x = layer.infer(&x);
        }
        self.output.infer(&x)
    }

    /// Posterior rows for every frame; errors when the feature width does
    /// not match the model.
    pub fn predict_posteriors(&self, features: &FeatureMatrix) -> Result<PosteriorMatrix> {
        if features.dim() != self.input_dim() {
            return Err(Error::contract(format!(
                "feature dim {} does not match classifier input {}",
                features.dim(),
                self.input_dim()
            )));
        }
        let rows = (0..features.frames())
            .map(|t| softmax(&self.logits(features.row(t))))
            .collect();
        PosteriorMatrix::from_rows(rows)
    }

    /// Mean cross-entropy over a labeled frame set.
    pub fn mean_loss(&self, features: &FeatureMatrix, labels: &[ClassId]) -> f64 {
        let total: f64 = labels
            .iter()
            .enumerate()
            .map(|(t, &y)| -log_softmax(&self.logits(features.row(t)))[y.index()])
            .sum();
        total / labels.len() as f64
    }

    /// Fraction of frames whose argmax posterior matches the label.
    pub fn accuracy(&self, features: &FeatureMatrix, labels: &[ClassId]) -> f64 {
        let correct = labels
            .iter()
            .enumerate()
            .filter(|(t, &y)| {
                let logits = self.logits(features.row(*t));
                let mut best = 0usize;
                for (j, &v) in logits.iter().enumerate() {
                    if v > logits[best] {
                        best = j;
                    }
                }
                best == y.index()
            })
            .count();
        correct as f64 / labels.len() as f64
    }

    fn zero_grads(&mut self) {
        for layer in &mut self.hidden {
            layer.zero_grads();
        }
        self.output.zero_grads();
    }

    fn params_and_grads(&mut self) -> Vec<(&mut Matrix, &mut Matrix)> {
        let mut out = Vec::new();
        for layer in &mut self.hidden {
            out.extend(layer.params_and_grads());
        }
        out.extend(self.output.params_and_grads());
        out
    }

    fn backward_frame(&mut self, features: &[f64], target: ClassId, weight: f64) -> f64 {
        let mut x = features.to_vec();
        let mut caches = Vec::with_capacity(self.hidden.len());
        for layer in &self.hidden {
            let (next, cache) = layer.forward(&x);
            caches.push(cache);
            x = next;
        }
        let (logits, out_cache) = self.output.forward(&x);
        let probs = softmax(&logits);
        let loss = cross_entropy(&probs, target.index());

        let dlogits = softmax_ce_grad(&probs, target.index(), weight);
        let mut dx = self.output.backward(&out_cache, &dlogits);
        for (layer, cache) in self.hidden.iter_mut().zip(caches.iter()).rev() {
            dx = layer.backward(cache, &dx);
        }
        loss
    }

    // -----------------------------------------------------------------------
    // Checkpoints
    // -----------------------------------------------------------------------

    pub fn save(&self, path: &Path) -> Result<()> {
        let kind = match self.kind {
            ClassifierKind::LogReg => "logreg",
            ClassifierKind::Mlp => "mlp",
        };
        let meta = vec![
            ("kind".to_string(), kind.to_string()),
            ("hidden_layers".to_string(), self.hidden.len().to_string()),
        ];
        let mut tensors: Vec<(String, &Matrix)> = Vec::new();
        for (i, layer) in self.hidden.iter().enumerate() {
            for (n, m) in layer.named_tensors() {
                tensors.push((format!("h{i}.{n}"), m));
            }
        }
        for (n, m) in self.output.named_tensors() {
            tensors.push((format!("out.{n}"), m));
        }
        crate::neural::save_tensors(path, &meta, &tensors)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut file = crate::neural::load_tensors(path)?;
        let kind = match file.meta_value("kind") {
            Some("logreg") => ClassifierKind::LogReg,
            Some("mlp") => ClassifierKind::Mlp,
            other => {
                return Err(Error::contract(format!(
                    "checkpoint kind {other:?} is not a frame classifier"
                )))
            }
        };
        let layers: usize = file
            .meta_value("hidden_layers")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::contract("checkpoint is missing hidden_layers"))?;

        let mut take = |name: &str| {
            file.take_tensor(name)
                .ok_or_else(|| Error::contract(format!("checkpoint is missing tensor {name}")))
        };
        let mut hidden = Vec::with_capacity(layers);
        for i in 0..layers {
            let w = take(&format!("h{i}.w"))?;
            let b = take(&format!("h{i}.b"))?;
            let mut layer = Dense::zeroed(w.cols(), w.rows(), Activation::Relu);
            layer.w = w;
            layer.b = b;
            hidden.push(layer);
        }
        let w = take("out.w")?;
        let b = take("out.b")?;
        let mut output = Dense::zeroed(w.cols(), w.rows(), Activation::Linear);
        output.w = w;
        output.b = b;
        Ok(FrameClassifier {
            kind,
            hidden,
            output,
        })
    }
}

/// Train a classifier on labeled frames, early-stopping on the validation
/// pair when given (otherwise every tenth frame is held out).
pub fn train_classifier<R: Rng>(
    features: &FeatureMatrix,
    labels: &[ClassId],
    validation: Option<(&FeatureMatrix, &[ClassId])>,
    config: &ClassifierConfig,
    rng: &mut R,
) -> Result<FrameClassifier> {
    if features.frames() != labels.len() {
        return Err(Error::contract(format!(
            "{} feature rows vs {} labels",
            features.frames(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::contract("no training frames"));
    }

    let (fit_idx, val_owned): (Vec<usize>, Option<(FeatureMatrix, Vec<ClassId>)>) =
        if validation.is_some() {
            ((0..labels.len()).collect(), None)
        } else {
            let fit: Vec<usize> = (0..labels.len()).filter(|i| i % 10 != 9).collect();
            let held: Vec<usize> = (0..labels.len()).filter(|i| i % 10 == 9).collect();
            let mut vf = FeatureMatrix::new(held.len(), features.dim());
            let mut vl = Vec::with_capacity(held.len());
            for (row, &i) in held.iter().enumerate() {
                vf.row_mut(row).copy_from_slice(features.row(i));
                vl.push(labels[i]);
            }
            (fit, Some((vf, vl)))
        };
    let (val_features, val_labels): (&FeatureMatrix, &[ClassId]) = match (&validation, &val_owned) {
        (Some((f, l)), _) => (f, l),
        (None, Some((f, l))) => (f, l),
        _ => unreachable!(),
    };

    let mut model = FrameClassifier::new(features.dim(), config, rng)?;
    let mut optimizer = SgdMomentum::new(config.momentum, config.lr0, config.max_epochs);
    optimizer.clip_norm = Some(config.clip_norm);

    let mut best = model.clone();
    let mut best_val = -model.mean_loss(val_features, val_labels);
    let mut stale = 0usize;
    let mut order = fit_idx;

    for epoch in 0..config.max_epochs {
        order.shuffle(rng);
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            model.zero_grads();
            let weight = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += model.backward_frame(features.row(i), labels[i], weight) * weight;
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
        let val = -model.mean_loss(val_features, val_labels);
        if val > best_val {
            best_val = val;
            best = model.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

/// Recipe for a synthetic corpus with known ground truth.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub num_train_songs: usize,
    pub num_test_songs: usize,
    /// Song length range in seconds (uniform).
    pub song_len_s: (f64, f64),
    /// Frame-level probability of staying on the current chord.
    pub self_transition: f64,
    /// Standard deviation of the Gaussian feature noise.
    pub noise_sigma: f64,
    /// Cyclic chord progression to follow; `None` draws successors uniformly
    /// from the other 23 chords.
    pub grammar: Option<Vec<ClassId>>,
    /// When set, every song follows its own freshly drawn cyclic progression
    /// of this length instead of the shared `grammar`.
    pub progression_len: Option<usize>,
    /// No-chord lead-in length in seconds (0 disables it).
    pub lead_silence_s: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            num_train_songs: 24,
            num_test_songs: 8,
            song_len_s: (20.0, 40.0),
            self_transition: 0.95,
            noise_sigma: 0.4,
            grammar: None,
            progression_len: None,
            lead_silence_s: 0.5,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.num_train_songs == 0 && self.num_test_songs == 0 {
            return Err(Error::contract("corpus needs at least one song"));
        }
        if self.num_train_songs >= crate::dataset::TRAIN_ID_BOUND as usize {
            return Err(Error::contract("too many training songs for the id scheme"));
        }
        if !(self.song_len_s.0 > 0.0 && self.song_len_s.1 >= self.song_len_s.0) {
            return Err(Error::contract("song length range must be positive and ordered"));
        }
        if !(self.self_transition > 0.0 && self.self_transition < 1.0) {
            return Err(Error::contract("self-transition must lie strictly inside (0, 1)"));
        }
        if self.noise_sigma < 0.0 || self.lead_silence_s < 0.0 {
            return Err(Error::contract("noise sigma and lead silence must be >= 0"));
        }
        if self.grammar.is_some() && self.progression_len.is_some() {
            return Err(Error::contract(
                "grammar and progression_len cannot both be set",
            ));
        }
        if let Some(n) = self.progression_len {
            if n < 2 || n > 24 {
                return Err(Error::contract("per-song progressions need 2..=24 chords"));
            }
        }
        if let Some(g) = &self.grammar {
            if g.is_empty() {
                return Err(Error::contract("grammar progression is empty"));
            }
            if g.contains(&ClassId::NO_CHORD) {
                return Err(Error::contract("grammar must use pitched chords"));
            }
            for i in 0..g.len() {
                if g[i] == g[(i + 1) % g.len()] {
                    return Err(Error::contract("grammar repeats a chord consecutively"));
                }
            }
        }
        Ok(())
    }
}

/// One generated song: annotations plus per-frame features.
#[derive(Debug, Clone)]
pub struct SynthSong {
    pub track: AnnotationTrack,
    pub features: FeatureMatrix,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub songs: Vec<SynthSong>,
}

impl SynthCorpus {
    pub fn tracks(&self) -> Vec<AnnotationTrack> {
        self.songs.iter().map(|s| s.track.clone()).collect()
    }
}

/// Draw a cyclic progression with no immediate repeats, including the wrap.
fn random_progression<R: Rng>(len: usize, rng: &mut R) -> Vec<ClassId> {
    loop {
        let mut prog = Vec::with_capacity(len);
        for i in 0..len {
            let prev = if i == 0 { None } else { Some(prog[i - 1]) };
            let mut next = ClassId::new(rng.gen_range(0..24)).unwrap();
            while Some(next) == prev {
                next = ClassId::new(rng.gen_range(0..24)).unwrap();
            }
            prog.push(next);
        }
        if prog[0] != prog[len - 1] {
            return prog;
        }
    }
}

fn sample_chord_frames<R: Rng>(spec: &SynthSpec, total_frames: usize, rng: &mut R) -> Vec<ClassId> {
    let lead = (spec.lead_silence_s * FRAME_RATE_HZ).round() as usize;
    let lead = lead.min(total_frames);
    let mut frames = vec![ClassId::NO_CHORD; lead];

    // per-song progressions start at phase 0 so the repetition structure is
    // aligned with the song start; a shared grammar starts anywhere
    let song_prog = spec.progression_len.map(|n| random_progression(n, rng));
    let (cycle, mut cycle_pos) = match (&spec.grammar, &song_prog) {
        (Some(g), _) => (Some(g), rng.gen_range(0..g.len())),
        (None, Some(p)) => (Some(p), 0),
        (None, None) => (None, 0),
    };
    let mut current = match cycle {
        Some(c) => c[cycle_pos],
        None => ClassId::new(rng.gen_range(0..24)).unwrap(),
    };

    while frames.len() < total_frames {
        frames.push(current);
        // geometric duration: stay with the configured probability
        if rng.gen::<f64>() >= spec.self_transition {
            current = match cycle {
                Some(c) => {
                    cycle_pos = (cycle_pos + 1) % c.len();
                    c[cycle_pos]
                }
                None => {
                    // uniform over the other 23 pitched chords
                    let mut next = rng.gen_range(0..23);
                    if next >= current.index() {
                        next += 1;
                    }
                    ClassId::new(next as u8).unwrap()
                }
            };
        }
    }
    frames
}

fn synth_track(song_id: u32, frames: &[ClassId]) -> AnnotationTrack {
    let mut track = crate::dataset::frames_to_track(song_id, frames);
    track.title = format!("synthetic song {song_id}");
    track.artist = "generator".to_string();
    track
}

/// Generate a corpus: training songs get ids 1.., test songs 1000.., so the
/// standard id split applies. Features are the chord's one-hot template in a
/// 25-dimensional space plus Gaussian noise.
pub fn synth_corpus<R: Rng>(spec: &SynthSpec, rng: &mut R) -> Result<SynthCorpus> {
    spec.validate()?;
    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::contract(format!("bad noise sigma: {e}")))?;

    let mut songs = Vec::with_capacity(spec.num_train_songs + spec.num_test_songs);
    let ids = (1..=spec.num_train_songs as u32).chain(1000..1000 + spec.num_test_songs as u32);
    for song_id in ids {
        let len_s = rng.gen_range(spec.song_len_s.0..=spec.song_len_s.1);
        let total_frames = (len_s * FRAME_RATE_HZ).round().max(1.0) as usize;
        let frames = sample_chord_frames(spec, total_frames, rng);

        let mut features = FeatureMatrix::new(frames.len(), NUM_CLASSES);
        for (t, &class) in frames.iter().enumerate() {
            let row = features.row_mut(t);
            if spec.noise_sigma > 0.0 {
                for v in row.iter_mut() {
                    *v = noise.sample(rng);
                }
            }
            row[class.index()] += 1.0;
        }

        songs.push(SynthSong {
            track: synth_track(song_id, &frames),
            features,
        });
    }
    Ok(SynthCorpus { songs })
}

// ---------------------------------------------------------------------------
// Feature and posterior files
// ---------------------------------------------------------------------------

pub fn save_posteriors(path: &Path, matrix: &PosteriorMatrix) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "frames={} classes={NUM_CLASSES} fps={}",
        matrix.frames(),
        FRAME_RATE_HZ as u32
    )?;
    for t in 0..matrix.frames() {
        let row = matrix
            .row(t)
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn load_posteriors(path: &Path) -> Result<PosteriorMatrix> {
    let (header, rows) = load_grid(path)?;
    let classes = header_field(path, &header, "classes")?;
    if classes != NUM_CLASSES {
        return Err(Error::DataFormat {
            file: path.to_path_buf(),
            line: 1,
            reason: format!("classes={classes}, expected {NUM_CLASSES}"),
        });
    }
    let frames = header_field(path, &header, "frames")?;
    if rows.len() != frames {
        return Err(Error::DataFormat {
            file: path.to_path_buf(),
            line: 1,
            reason: format!("header says {frames} frames, file has {}", rows.len()),
        });
    }
    PosteriorMatrix::from_rows_with_tol(rows, 1e-6).map_err(|e| Error::DataFormat {
        file: path.to_path_buf(),
        line: 0,
        reason: e.to_string(),
    })
}

pub fn save_features(path: &Path, features: &FeatureMatrix) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "frames={} dim={} fps={}",
        features.frames(),
        features.dim(),
        FRAME_RATE_HZ as u32
    )?;
    for t in 0..features.frames() {
        let row = features
            .row(t)
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn load_features(path: &Path) -> Result<FeatureMatrix> {
    let (header, rows) = load_grid(path)?;
    let dim = header_field(path, &header, "dim")?;
    let frames = header_field(path, &header, "frames")?;
    if rows.len() != frames {
        return Err(Error::DataFormat {
            file: path.to_path_buf(),
            line: 1,
            reason: format!("header says {frames} frames, file has {}", rows.len()),
        });
    }
    let mut out = FeatureMatrix::new(frames, dim);
    for (t, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::DataFormat {
                file: path.to_path_buf(),
                line: t + 2,
                reason: format!("expected {dim} values, found {}", row.len()),
            });
        }
        out.row_mut(t).copy_from_slice(row);
    }
    Ok(out)
}

fn load_grid(path: &Path) -> Result<(String, Vec<Vec<f64>>)> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => return Err(Error::Io(e)),
        None => {
            return Err(Error::DataFormat {
                file: path.to_path_buf(),
                line: 1,
                reason: "empty file".into(),
            })
        }
    };
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(Error::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::DataFormat {
                file: path.to_path_buf(),
                line: i + 1,
                reason: format!("bad number: {e}"),
            })?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn header_field(path: &Path, header: &str, key: &str) -> Result<usize> {
    header
        .split_whitespace()
        .find_map(|f| f.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::DataFormat {
            file: path.to_path_buf(),
            line: 1,
            reason: format!("header is missing {key}=<n>"),
        })
}
