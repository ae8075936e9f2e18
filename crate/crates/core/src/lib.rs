//! Chord sequence modelling at desk scale.
//!
//! This crate bundles everything needed to study temporal models for chord
//! recognition without touching audio: chord label parsing and the
//! major/minor class space ([`chord`]), corpus ingestion and frame sampling
//! ([`dataset`]), a first-order Markov chain ([`markov`]) and an LSTM
//! language model ([`rnnlm`]) over the 25 chord classes, frame-level
//! acoustic classifiers and a synthetic corpus generator ([`acoustic`]),
//! three decoders connecting acoustic posteriors to label sequences
//! ([`decode`]), and the evaluation metrics ([`eval`]).
//!
//! All probabilities are handled in natural-log space, all floats are `f64`,
//! and every randomized component takes an explicit seeded RNG, so runs are
//! reproducible bit for bit.

pub mod acoustic;
pub mod chord;
pub mod dataset;
pub mod decode;
pub mod error;
pub mod eval;
pub mod markov;
pub mod neural;
pub mod rnnlm;
pub mod temporal;

pub use chord::{ChordQuality, ChordSymbol, ClassId, PitchClass, RawChordLabel, NUM_CLASSES};
pub use error::{Error, Result};
pub use temporal::TemporalModel;

/// Analysis frame rate: 10 frames per second (one frame per 100 ms).
pub const FRAME_RATE_HZ: f64 = 10.0;
