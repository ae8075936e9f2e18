//! Experiment drivers: corpus preparation, model training, decoding, and
//! report emission shared by the command-line verbs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use chordseq_core::acoustic::{
    load_features, save_features, synth_corpus, train_classifier, ClassifierKind, FeatureMatrix,
    FrameClassifier,
};
use chordseq_core::chord::{ClassId, NUM_CLASSES};
use chordseq_core::dataset::{
    collapse, frames_to_track, load_corpus, reduce_track, sample_frames, save_track, split_corpus,
    validation_split, AnnotationTrack, METADATA_FILE,
};
use chordseq_core::decode::{hashed_beam_search, majority_vote, viterbi, DecoderConfig};
use chordseq_core::eval::{logprob_report, wcsr, ClassSpan, LogProbReport, WcsrReport};
use chordseq_core::markov::MarkovModel;
use chordseq_core::rnnlm::{self, RnnLm};

use crate::config::ExperimentConfig;
use crate::manifest::write_manifest;

// RNG stream ids, one per randomized stage, so adding a stage never shifts
// the draws of another.
const STREAM_SYNTH: u64 = 1;
const STREAM_RNN: u64 = 2;
const STREAM_LOGREG: u64 = 3;
const STREAM_MLP: u64 = 4;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// ---------------------------------------------------------------------------
// Corpus preparation
// ---------------------------------------------------------------------------

pub struct PreparedCorpus {
    /// Training tracks used for parameter fitting.
    pub fit: Vec<AnnotationTrack>,
    /// Training tracks held out for validation / early stopping.
    pub validation: Vec<AnnotationTrack>,
    pub test: Vec<AnnotationTrack>,
    /// Per-song features, when the corpus provides them.
    pub features: BTreeMap<u32, FeatureMatrix>,
}

impl PreparedCorpus {
    pub fn train_tracks(&self) -> Vec<&AnnotationTrack> {
        self.fit.iter().chain(self.validation.iter()).collect()
    }
}

/// Load the configured corpus directory, or synthesize one.
pub fn prepare_corpus(config: &ExperimentConfig, need_features: bool) -> anyhow::Result<PreparedCorpus> {
    let (tracks, features) = match &config.corpus.dir {
        Some(dir) => {
            let tracks = load_corpus(dir).context("loading corpus")?;
            if tracks.is_empty() {
                bail!("corpus directory {} has no .lab files", dir.display());
            }
            let mut features = BTreeMap::new();
            if need_features {
                for track in &tracks {
                    let path = dir.join(format!("{}.feat", track.song_id));
                    let fm = load_features(&path)
                        .with_context(|| format!("loading features for song {}", track.song_id))?;
                    features.insert(track.song_id, fm);
                }
            }
            (tracks, features)
        }
        None => {
            let spec = config.synth.to_spec()?;
            let corpus = synth_corpus(&spec, &mut rng_for(config.seed, STREAM_SYNTH))?;
            let mut features = BTreeMap::new();
            if need_features {
                for song in &corpus.songs {
                    features.insert(song.track.song_id, song.features.clone());
                }
            }
            (corpus.tracks(), features)
        }
    };

    // features for songs that got dropped by the split are harmless; keep map
    let split = split_corpus(&tracks);
    let (fit, validation) = validation_split(&split.train);
    if need_features {
        for track in fit.iter().chain(validation.iter()).chain(split.test.iter()) {
            let fm = features
                .get(&track.song_id)
                .ok_or_else(|| anyhow!("song {} has no features", track.song_id))?;
            let frames = sample_frames(track)?;
            if fm.frames() != frames.len() {
                bail!(
                    "song {}: {} feature frames vs {} annotation frames",
                    track.song_id,
                    fm.frames(),
                    frames.len()
                );
            }
        }
    }
    Ok(PreparedCorpus {
        fit,
        validation,
        test: split.test,
        features,
    })
}

pub fn frame_sequences(tracks: &[&AnnotationTrack]) -> anyhow::Result<Vec<Vec<ClassId>>> {
    tracks
        .iter()
        .map(|t| Ok(sample_frames(t)?.classes))
        .collect()
}

pub fn chord_sequences(tracks: &[&AnnotationTrack]) -> anyhow::Result<Vec<Vec<ClassId>>> {
    tracks
        .iter()
        .map(|t| Ok(collapse(&sample_frames(t)?).classes))
        .collect()
}

/// Concatenate per-song features and frame labels for classifier training.
pub fn labeled_frames(
    tracks: &[&AnnotationTrack],
    features: &BTreeMap<u32, FeatureMatrix>,
) -> anyhow::Result<(FeatureMatrix, Vec<ClassId>)> {
    let mut total = 0usize;
    let mut dim = None;
    for track in tracks {
        let fm = features
            .get(&track.song_id)
            .ok_or_else(|| anyhow!("song {} has no features", track.song_id))?;
        total += fm.frames();
        if *dim.get_or_insert(fm.dim()) != fm.dim() {
            bail!("inconsistent feature dimensions across songs");
        }
    }
    let dim = dim.ok_or_else(|| anyhow!("no tracks to train on"))?;

    let mut out = FeatureMatrix::new(total, dim);
    let mut labels = Vec::with_capacity(total);
    let mut row = 0usize;
    for track in tracks {
        let fm = &features[&track.song_id];
        let frames = sample_frames(track)?;
        for t in 0..fm.frames() {
            out.row_mut(row).copy_from_slice(fm.row(t));
            labels.push(frames.classes[t]);
            row += 1;
        }
    }
    Ok((out, labels))
}

/// Smoothed class frequencies of the given frame labels.
pub fn class_priors(labels: &[ClassId]) -> Vec<f64> {
    let mut counts = vec![1.0f64; NUM_CLASSES];
    for &c in labels {
        counts[c.index()] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

// ---------------------------------------------------------------------------
// Experiment 1: sequence likelihood at frame level
// ---------------------------------------------------------------------------

pub struct Exp1Report {
    pub markov: LogProbReport,
    pub rnn: LogProbReport,
    pub rnn_training: rnnlm::TrainReport,
}

impl Exp1Report {
    pub fn csv(&self) -> String {
        let mut out = String::from("model,l,l_change,l_stay\n");
        for (name, r) in [("markov", &self.markov), ("rnn", &self.rnn)] {
            out.push_str(&format!(
                "{name},{},{},{}\n",
                r.avg(),
                r.avg_change(),
                r.avg_stay()
            ));
        }
        out
    }
}

/// Train both temporal models on the training split and report the
/// log-probability partition on the test split.
pub fn run_exp1(config: &ExperimentConfig) -> anyhow::Result<Exp1Report> {
    let corpus = prepare_corpus(config, false)?;
    exp1_on_sequences(
        config,
        &frame_sequences(&corpus.fit.iter().collect::<Vec<_>>())?,
        &frame_sequences(&corpus.validation.iter().collect::<Vec<_>>())?,
        &frame_sequences(&corpus.test.iter().collect::<Vec<_>>())?,
    )
}

/// Shared by exp1 (frame level) and exp3 (chord level): fit the Markov chain
/// on the full training side, train the LSTM with early stopping on the
/// validation slice, evaluate both on test.
pub fn exp1_on_sequences(
    config: &ExperimentConfig,
    fit: &[Vec<ClassId>],
    validation: &[Vec<ClassId>],
    test: &[Vec<ClassId>],
) -> anyhow::Result<Exp1Report> {
    if test.is_empty() {
        bail!("no test sequences");
    }
    let mut all_train: Vec<Vec<ClassId>> = fit.to_vec();
    all_train.extend(validation.iter().cloned());

    let markov = MarkovModel::fit(&all_train, config.markov.alpha)?;
    let (rnn, rnn_training) = rnnlm::train(
        fit,
        validation,
        config.rnn.to_config(),
        &mut rng_for(config.seed, STREAM_RNN),
    )?;

    Ok(Exp1Report {
        markov: logprob_report(&markov, test),
        rnn: logprob_report(&rnn, test),
        rnn_training,
    })
}

/// `exp1` verb: run and write CSV, text report, and manifest.
pub fn cmd_exp1(config: &ExperimentConfig) -> anyhow::Result<Exp1Report> {
    let report = run_exp1(config)?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("exp1.csv"), report.csv())?;
    std::fs::write(
        dir.join("exp1_report.txt"),
        format!(
            "[markov]\n{}\n\n[rnn]\n{}\n\nrnn_best_epoch={}\nrnn_epochs_run={}\n",
            report.markov, report.rnn, report.rnn_training.best_epoch, report.rnn_training.epochs_run
        ),
    )?;
    write_manifest(dir, "exp1", config)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Experiment 2: full decoding, WCSR grid
// ---------------------------------------------------------------------------

pub const TEMPORAL_NAMES: [&str; 4] = ["none", "mv", "hmm", "rnn"];

pub struct Exp2Report {
    /// Rows: (acoustic model name, WCSR in points for none/mv/hmm/rnn).
    pub rows: Vec<(String, [f64; 4])>,
}

impl Exp2Report {
    pub fn csv(&self) -> String {
        let mut out = String::from("acoustic,none,mv,hmm,rnn\n");
        for (name, cells) in &self.rows {
            out.push_str(&format!(
                "{name},{},{},{},{}\n",
                cells[0], cells[1], cells[2], cells[3]
            ));
        }
        out
    }

    pub fn cell(&self, acoustic: &str, temporal: &str) -> Option<f64> {
        let col = TEMPORAL_NAMES.iter().position(|n| *n == temporal)?;
        self.rows
            .iter()
            .find(|(name, _)| name == acoustic)
            .map(|(_, cells)| cells[col])
    }
}

/// Decode every test song with all four temporal treatments and score WCSR.
pub fn run_exp2(config: &ExperimentConfig) -> anyhow::Result<Exp2Report> {
    let corpus = prepare_corpus(config, true)?;
    if corpus.test.is_empty() {
        bail!("no test songs");
    }

    let fit_refs: Vec<&AnnotationTrack> = corpus.fit.iter().collect();
    let val_refs: Vec<&AnnotationTrack> = corpus.validation.iter().collect();
    let (train_features, train_labels) = labeled_frames(&fit_refs, &corpus.features)?;
    let (val_features, val_labels) = labeled_frames(&val_refs, &corpus.features)?;

    let logreg = train_classifier(
        &train_features,
        &train_labels,
        Some((&val_features, &val_labels)),
        &config.acoustic.to_config(ClassifierKind::LogReg),
        &mut rng_for(config.seed, STREAM_LOGREG),
    )?;
    let mlp = train_classifier(
        &train_features,
        &train_labels,
        Some((&val_features, &val_labels)),
        &config.acoustic.to_config(ClassifierKind::Mlp),
        &mut rng_for(config.seed, STREAM_MLP),
    )?;

    let fit_seqs = frame_sequences(&fit_refs)?;
    let val_seqs = frame_sequences(&val_refs)?;
    let mut all_train = fit_seqs.clone();
    all_train.extend(val_seqs.iter().cloned());
    let markov = MarkovModel::fit(&all_train, config.markov.alpha)?;
    let (rnn, _) = rnnlm::train(
        &fit_seqs,
        &val_seqs,
        config.rnn.to_config(),
        &mut rng_for(config.seed, STREAM_RNN),
    )?;

    let decoder = config.decoder.to_config(Some(class_priors(&train_labels)));

    let mut rows = Vec::new();
    for (name, classifier) in [("logreg", &logreg), ("mlp", &mlp)] {
        let cells = wcsr_row(&corpus, classifier, &markov, &rnn, &decoder)?;
        rows.push((name.to_string(), cells));
    }
    Ok(Exp2Report { rows })
}

fn wcsr_row(
    corpus: &PreparedCorpus,
    classifier: &FrameClassifier,
    markov: &MarkovModel,
    rnn: &RnnLm,
    decoder: &DecoderConfig,
) -> anyhow::Result<[f64; 4]> {
    // (reference spans, one decoded span list per temporal model) per song
    let per_song: Vec<anyhow::Result<(Vec<ClassSpan>, [Vec<ClassSpan>; 4])>> = corpus
        .test
        .par_iter()
        .map(|track| {
            let features = &corpus.features[&track.song_id];
            let posteriors = classifier.predict_posteriors(features)?;
            let reference = reduce_track(track)?;

            let spans = |frames: &chordseq_core::dataset::FrameSequence| {
                reduce_track(&frames_to_track(track.song_id, &frames.classes))
            };
            let none = spans(&posteriors.argmax_frames())?;
            let mv = spans(&majority_vote(&posteriors, decoder))?;
            let hmm = spans(&viterbi(&posteriors, markov, decoder)?)?;
            let beam = spans(&hashed_beam_search(&posteriors, rnn, decoder)?)?;
            Ok((reference, [none, mv, hmm, beam]))
        })
        .collect();

    let mut totals = [
        WcsrReport { correct_s: 0.0, annotated_s: 0.0 },
        WcsrReport { correct_s: 0.0, annotated_s: 0.0 },
        WcsrReport { correct_s: 0.0, annotated_s: 0.0 },
        WcsrReport { correct_s: 0.0, annotated_s: 0.0 },
    ];
    for (track, result) in corpus.test.iter().zip(per_song) {
        let (reference, decoded) = result?;
        for (slot, spans) in totals.iter_mut().zip(decoded) {
            let song = wcsr(
                &[(track.song_id, reference.clone())],
                &[(track.song_id, spans)],
            )?;
            *slot = slot.clone().merged(&song);
        }
    }
    Ok([
        100.0 * totals[0].recall(),
        100.0 * totals[1].recall(),
        100.0 * totals[2].recall(),
        100.0 * totals[3].recall(),
    ])
}

pub fn cmd_exp2(config: &ExperimentConfig) -> anyhow::Result<Exp2Report> {
    let report = run_exp2(config)?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("exp2.csv"), report.csv())?;
    write_manifest(dir, "exp2", config)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Experiment 3: chord-level language modelling
// ---------------------------------------------------------------------------

pub struct TraceEntry {
    pub song_id: u32,
    /// (position, symbol, log-probability) under the trained LSTM.
    pub rows: Vec<(usize, ClassId, f64)>,
}

pub struct Exp3Report {
    pub markov: LogProbReport,
    pub rnn: LogProbReport,
    pub rnn_training: rnnlm::TrainReport,
    pub traces: Vec<TraceEntry>,
}

impl Exp3Report {
    pub fn csv(&self) -> String {
        let mut out = String::from("model,l,l_change,l_stay\n");
        for (name, r) in [("markov", &self.markov), ("rnn", &self.rnn)] {
            out.push_str(&format!(
                "{name},{},{},{}\n",
                r.avg(),
                r.avg_change(),
                r.avg_stay()
            ));
        }
        out
    }
}

pub fn run_exp3(config: &ExperimentConfig) -> anyhow::Result<Exp3Report> {
    let corpus = prepare_corpus(config, false)?;
    let fit = chord_sequences(&corpus.fit.iter().collect::<Vec<_>>())?;
    let validation = chord_sequences(&corpus.validation.iter().collect::<Vec<_>>())?;
    let test = chord_sequences(&corpus.test.iter().collect::<Vec<_>>())?;
    if test.is_empty() {
        bail!("no test sequences");
    }

    let mut all_train = fit.clone();
    all_train.extend(validation.iter().cloned());
    let markov = MarkovModel::fit(&all_train, config.markov.alpha)?;
    let (rnn, rnn_training) = rnnlm::train(
        &fit,
        &validation,
        config.rnn.to_config(),
        &mut rng_for(config.seed, STREAM_RNN),
    )?;

    let traces = corpus
        .test
        .iter()
        .zip(test.iter())
        .take(config.trace_songs)
        .map(|(track, seq)| TraceEntry {
            song_id: track.song_id,
            rows: rnn
                .per_symbol_logprobs(seq)
                .into_iter()
                .enumerate()
                .map(|(k, lp)| (k, seq[k], lp))
                .collect(),
        })
        .collect();

    Ok(Exp3Report {
        markov: logprob_report(&markov, &test),
        rnn: logprob_report(&rnn, &test),
        rnn_training,
        traces,
    })
}

pub fn cmd_exp3(config: &ExperimentConfig) -> anyhow::Result<Exp3Report> {
    let report = run_exp3(config)?;
    let dir = &config.output_dir;
    let trace_dir = dir.join("traces");
    std::fs::create_dir_all(&trace_dir)?;
    std::fs::write(dir.join("exp3.csv"), report.csv())?;
    for trace in &report.traces {
        let mut csv = String::from("index,symbol,logprob\n");
        for (k, symbol, lp) in &trace.rows {
            csv.push_str(&format!("{k},{symbol},{lp}\n"));
        }
        std::fs::write(trace_dir.join(format!("trace_{}.csv", trace.song_id)), csv)?;
    }
    write_manifest(dir, "exp3", config)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Granular verbs
// ---------------------------------------------------------------------------

/// Write a synthetic corpus (labels, features, metadata) under
/// `<output_dir>/corpus`.
pub fn cmd_synth(config: &ExperimentConfig) -> anyhow::Result<PathBuf> {
    let spec = config.synth.to_spec()?;
    let corpus = synth_corpus(&spec, &mut rng_for(config.seed, STREAM_SYNTH))?;
    let dir = config.output_dir.join("corpus");
    std::fs::create_dir_all(&dir)?;

    let mut metadata = String::new();
    for song in &corpus.songs {
        let id = song.track.song_id;
        save_track(&dir.join(format!("{id}.lab")), &song.track)?;
        save_features(&dir.join(format!("{id}.feat")), &song.features)?;
        metadata.push_str(&format!(
            "{id}\t{}\t{}\n",
            song.track.title, song.track.artist
        ));
    }
    std::fs::write(dir.join(METADATA_FILE), metadata)?;
    write_manifest(&config.output_dir, "synth", config)?;
    Ok(dir)
}

/// Fit the Markov chain on the training split and save it.
pub fn cmd_train_markov(config: &ExperimentConfig, chord_level: bool) -> anyhow::Result<PathBuf> {
    let corpus = prepare_corpus(config, false)?;
    let tracks = corpus.train_tracks();
    let sequences = if chord_level {
        chord_sequences(&tracks)?
    } else {
        frame_sequences(&tracks)?
    };
    let model = MarkovModel::fit(&sequences, config.markov.alpha)?;
    let dir = config.output_dir.join("models");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("markov.mkv");
    model.save(&path)?;
    write_manifest(&config.output_dir, "train-markov", config)?;
    Ok(path)
}

/// Train the LSTM language model on the training split and save it.
pub fn cmd_train_rnn(config: &ExperimentConfig, chord_level: bool) -> anyhow::Result<PathBuf> {
    let corpus = prepare_corpus(config, false)?;
    let fit_refs: Vec<&AnnotationTrack> = corpus.fit.iter().collect();
    let val_refs: Vec<&AnnotationTrack> = corpus.validation.iter().collect();
    let (fit, validation) = if chord_level {
        (chord_sequences(&fit_refs)?, chord_sequences(&val_refs)?)
    } else {
        (frame_sequences(&fit_refs)?, frame_sequences(&val_refs)?)
    };
    let (model, _) = rnnlm::train(
        &fit,
        &validation,
        config.rnn.to_config(),
        &mut rng_for(config.seed, STREAM_RNN),
    )?;
    let dir = config.output_dir.join("models");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("rnn.tns");
    model.save(&path)?;
    write_manifest(&config.output_dir, "train-rnn", config)?;
    Ok(path)
}

/// Train an acoustic classifier on the training split and save it.
pub fn cmd_train_acoustic(
    config: &ExperimentConfig,
    kind: ClassifierKind,
) -> anyhow::Result<PathBuf> {
    let corpus = prepare_corpus(config, true)?;
    let fit_refs: Vec<&AnnotationTrack> = corpus.fit.iter().collect();
    let val_refs: Vec<&AnnotationTrack> = corpus.validation.iter().collect();
    let (train_features, train_labels) = labeled_frames(&fit_refs, &corpus.features)?;
    let (val_features, val_labels) = labeled_frames(&val_refs, &corpus.features)?;
    let (stream, file) = match kind {
        ClassifierKind::LogReg => (STREAM_LOGREG, "logreg.tns"),
        ClassifierKind::Mlp => (STREAM_MLP, "mlp.tns"),
    };
    let model = train_classifier(
        &train_features,
        &train_labels,
        Some((&val_features, &val_labels)),
        &config.acoustic.to_config(kind),
        &mut rng_for(config.seed, stream),
    )?;
    let dir = config.output_dir.join("models");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(file);
    model.save(&path)?;
    write_manifest(&config.output_dir, "train-acoustic", config)?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalChoice {
    None,
    MajorityVote,
    Hmm,
    Rnn,
}

pub struct DecodeArgs {
    pub temporal: TemporalChoice,
    pub acoustic_model: Option<PathBuf>,
    /// Directory of per-song `<id>.post` files, bypassing the classifier.
    pub posteriors_dir: Option<PathBuf>,
    pub markov_model: Option<PathBuf>,
    pub rnn_model: Option<PathBuf>,
    pub save_posteriors: bool,
}

/// Decode the test split and write `decoded/<id>.lab` files.
pub fn cmd_decode(config: &ExperimentConfig, args: &DecodeArgs) -> anyhow::Result<PathBuf> {
    let need_features = args.posteriors_dir.is_none();
    let corpus = prepare_corpus(config, need_features)?;
    if corpus.test.is_empty() {
        bail!("no test songs to decode");
    }

    let classifier = match (&args.acoustic_model, &args.posteriors_dir) {
        (Some(path), _) => Some(FrameClassifier::load(path)?),
        (None, Some(_)) => None,
        (None, None) => bail!("decode needs --acoustic MODEL or --posteriors DIR"),
    };
    let markov = match &args.markov_model {
        Some(path) => Some(MarkovModel::load(path)?),
        None => None,
    };
    let rnn = match &args.rnn_model {
        Some(path) => Some(RnnLm::load(path)?),
        None => None,
    };
    match args.temporal {
        TemporalChoice::Hmm if markov.is_none() => bail!("--temporal hmm needs --markov MODEL"),
        TemporalChoice::Rnn if rnn.is_none() => bail!("--temporal rnn needs --rnn MODEL"),
        _ => {}
    }

    // training-set priors are only needed when prior division is on
    let decoder = if config.decoder.prior_division {
        let fit_refs: Vec<&AnnotationTrack> = corpus.fit.iter().collect();
        let labels: Vec<ClassId> = frame_sequences(&fit_refs)?.into_iter().flatten().collect();
        config.decoder.to_config(Some(class_priors(&labels)))
    } else {
        config.decoder.to_config(None)
    };

    let out_dir = config.output_dir.join("decoded");
    std::fs::create_dir_all(&out_dir)?;
    let post_dir = config.output_dir.join("posteriors");
    if args.save_posteriors {
        std::fs::create_dir_all(&post_dir)?;
    }

    for track in &corpus.test {
        let posteriors = match (&classifier, &args.posteriors_dir) {
            (Some(model), _) => model.predict_posteriors(&corpus.features[&track.song_id])?,
            (None, Some(dir)) => chordseq_core::acoustic::load_posteriors(
                &dir.join(format!("{}.post", track.song_id)),
            )?,
            _ => unreachable!(),
        };
        let frames = match args.temporal {
            TemporalChoice::None => posteriors.argmax_frames(),
            TemporalChoice::MajorityVote => majority_vote(&posteriors, &decoder),
            TemporalChoice::Hmm => viterbi(&posteriors, markov.as_ref().unwrap(), &decoder)?,
            TemporalChoice::Rnn => {
                hashed_beam_search(&posteriors, rnn.as_ref().unwrap(), &decoder)?
            }
        };
        save_track(
            &out_dir.join(format!("{}.lab", track.song_id)),
            &frames_to_track(track.song_id, &frames.classes),
        )?;
        if args.save_posteriors {
            chordseq_core::acoustic::save_posteriors(
                &post_dir.join(format!("{}.post", track.song_id)),
                &posteriors,
            )?;
        }
    }
    write_manifest(&config.output_dir, "decode", config)?;
    Ok(out_dir)
}

/// Score a saved temporal model on the test split.
pub fn cmd_eval_logprob(
    config: &ExperimentConfig,
    model_path: &Path,
    chord_level: bool,
) -> anyhow::Result<LogProbReport> {
    let corpus = prepare_corpus(config, false)?;
    let test_refs: Vec<&AnnotationTrack> = corpus.test.iter().collect();
    let test = if chord_level {
        chord_sequences(&test_refs)?
    } else {
        frame_sequences(&test_refs)?
    };
    if test.is_empty() {
        bail!("no test sequences");
    }

    let header = std::fs::read_to_string(model_path)?
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    let report = if header.starts_with("chordseq-markov") {
        logprob_report(&MarkovModel::load(model_path)?, &test)
    } else {
        logprob_report(&RnnLm::load(model_path)?, &test)
    };

    std::fs::create_dir_all(&config.output_dir)?;
    std::fs::write(
        config.output_dir.join("logprob_report.txt"),
        format!("{report}\n"),
    )?;
    write_manifest(&config.output_dir, "eval-logprob", config)?;
    Ok(report)
}

/// WCSR between two directories of `.lab` files matched by song id.
pub fn cmd_eval_wcsr(reference_dir: &Path, predicted_dir: &Path) -> anyhow::Result<WcsrReport> {
    let collect = |dir: &Path| -> anyhow::Result<Vec<(u32, Vec<ClassSpan>)>> {
        let tracks = load_corpus(dir)?;
        if tracks.is_empty() {
            bail!("{} has no .lab files", dir.display());
        }
        tracks
            .iter()
            .map(|t| Ok((t.song_id, reduce_track(t)?)))
            .collect()
    };
    let reference = collect(reference_dir)?;
    let predicted = collect(predicted_dir)?;
    Ok(wcsr(&reference, &predicted)?)
}
