//! Structured run configuration.
//!
//! Everything a run needs lives in one TOML file; unknown keys are rejected
//! so typos fail loudly. Defaults reproduce the published settings wherever
//! the source material states them (model sizes, training schedule, decoder
//! parameters); corpus and synthesis knobs default to a small corpus that
//! runs in minutes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use chordseq_core::acoustic::{ClassifierConfig, ClassifierKind, SynthSpec};
use chordseq_core::chord::{parse_and_reduce, ClassId};
use chordseq_core::decode::DecoderConfig;
use chordseq_core::rnnlm::RnnLmConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Songs whose per-symbol traces exp3 writes out.
    pub trace_songs: usize,
    pub corpus: CorpusSection,
    pub synth: SynthSection,
    pub markov: MarkovSection,
    pub rnn: RnnSection,
    pub acoustic: AcousticSection,
    pub decoder: DecoderSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            output_dir: PathBuf::from("out"),
            trace_songs: 3,
            corpus: CorpusSection::default(),
            synth: SynthSection::default(),
            markov: MarkovSection::default(),
            rnn: RnnSection::default(),
            acoustic: AcousticSection::default(),
            decoder: DecoderSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    /// Directory of `<id>.lab` files (plus `<id>.feat` and `metadata.tsv`
    /// where needed). When unset, experiments synthesize their corpus.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub train_songs: usize,
    pub test_songs: usize,
    pub song_len_s: (f64, f64),
    pub self_transition: f64,
    pub noise_sigma: f64,
    /// Shared cyclic progression as label text, e.g. ["G:maj", "C:maj"].
    pub grammar: Option<Vec<String>>,
    /// Per-song random progression length (mutually exclusive with grammar).
    pub progression_len: Option<usize>,
    pub lead_silence_s: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            train_songs: 24,
            test_songs: 8,
            song_len_s: (20.0, 40.0),
            self_transition: 0.95,
            noise_sigma: 0.4,
            grammar: None,
            progression_len: None,
            lead_silence_s: 0.5,
        }
    }
}

impl SynthSection {
    pub fn to_spec(&self) -> anyhow::Result<SynthSpec> {
        let grammar = match &self.grammar {
            None => None,
            Some(labels) => {
                let mut classes: Vec<ClassId> = Vec::with_capacity(labels.len());
                for text in labels {
                    classes.push(ClassId::from_symbol(parse_and_reduce(text)?));
                }
                Some(classes)
            }
        };
        Ok(SynthSpec {
            num_train_songs: self.train_songs,
            num_test_songs: self.test_songs,
            song_len_s: self.song_len_s,
            self_transition: self.self_transition,
            noise_sigma: self.noise_sigma,
            grammar,
            progression_len: self.progression_len,
            lead_silence_s: self.lead_silence_s,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarkovSection {
    /// Additive smoothing count.
    pub alpha: f64,
}

impl Default for MarkovSection {
    fn default() -> Self {
        MarkovSection { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RnnSection {
    pub num_layers: usize,
    pub hidden_size: usize,
    pub skip_connections: bool,
    pub seq_len: usize,
    pub max_epochs: usize,
    pub lr0: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub augment: bool,
    pub clip_norm: f64,
}

impl Default for RnnSection {
    fn default() -> Self {
        let d = RnnLmConfig::default();
        RnnSection {
            num_layers: d.num_layers,
            hidden_size: d.hidden_size,
            skip_connections: d.skip_connections,
            seq_len: d.seq_len,
            max_epochs: d.max_epochs,
            lr0: d.lr0,
            momentum: d.momentum,
            batch_size: d.batch_size,
            patience: d.patience,
            augment: d.augment,
            clip_norm: d.clip_norm,
        }
    }
}

impl RnnSection {
    pub fn to_config(&self) -> RnnLmConfig {
        RnnLmConfig {
            num_layers: self.num_layers,
            hidden_size: self.hidden_size,
            skip_connections: self.skip_connections,
            seq_len: self.seq_len,
            max_epochs: self.max_epochs,
            lr0: self.lr0,
            momentum: self.momentum,
            batch_size: self.batch_size,
            patience: self.patience,
            augment: self.augment,
            clip_norm: self.clip_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcousticSection {
    pub max_epochs: usize,
    pub lr0: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub mlp_hidden_layers: usize,
    pub mlp_hidden_size: usize,
}

impl Default for AcousticSection {
    fn default() -> Self {
        let d = ClassifierConfig::mlp();
        AcousticSection {
            max_epochs: d.max_epochs,
            lr0: d.lr0,
            momentum: d.momentum,
            batch_size: d.batch_size,
            patience: d.patience,
            mlp_hidden_layers: d.hidden_layers,
            mlp_hidden_size: d.hidden_size,
        }
    }
}

impl AcousticSection {
    pub fn to_config(&self, kind: ClassifierKind) -> ClassifierConfig {
        let (hidden_layers, hidden_size) = match kind {
            ClassifierKind::LogReg => (0, 0),
            ClassifierKind::Mlp => (self.mlp_hidden_layers, self.mlp_hidden_size),
        };
        ClassifierConfig {
            kind,
            hidden_layers,
            hidden_size,
            max_epochs: self.max_epochs,
            lr0: self.lr0,
            momentum: self.momentum,
            batch_size: self.batch_size,
            patience: self.patience,
            clip_norm: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoderSection {
    pub beam_width: usize,
    pub hash_len: usize,
    pub bin_cap: usize,
    pub mv_window_s: f64,
    pub lm_weight: f64,
    /// Divide emissions by training-set class priors.
    pub prior_division: bool,
}

impl Default for DecoderSection {
    fn default() -> Self {
        let d = DecoderConfig::default();
        DecoderSection {
            beam_width: d.beam_width,
            hash_len: d.hash_len,
            bin_cap: d.bin_cap,
            mv_window_s: d.mv_window_s,
            lm_weight: d.lm_weight,
            prior_division: false,
        }
    }
}

impl DecoderSection {
    /// Build the decoder config; priors are attached only when the division
    /// flag is on.
    pub fn to_config(&self, class_priors: Option<Vec<f64>>) -> DecoderConfig {
        DecoderConfig {
            beam_width: self.beam_width,
            hash_len: self.hash_len,
            bin_cap: self.bin_cap,
            mv_window_s: self.mv_window_s,
            lm_weight: self.lm_weight,
            class_priors: if self.prior_division { class_priors } else { None },
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("bad config {}: {e}", path.display()))?;
        Ok(config)
    }

    /// Reset every model and decoder hyperparameter to the published values,
    /// keeping corpus locations, seed, and output directory.
    pub fn pin_paper_defaults(&mut self) {
        self.markov = MarkovSection::default();
        self.rnn = RnnSection::default();
        self.decoder = DecoderSection::default();
        self.acoustic = AcousticSection::default();
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
