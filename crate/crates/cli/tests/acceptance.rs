//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `--nocapture`) and failing loudly otherwise.
//!
//! Oracles here are written from scratch against the model definitions
//! (exhaustive enumeration, finite differences, closed forms) and never call
//! the implementation paths they judge.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chordseq_cli::config::ExperimentConfig;
use chordseq_cli::experiments::{run_exp1, run_exp2, run_exp3};
use chordseq_core::acoustic::{ClassifierConfig, FeatureMatrix, FrameClassifier, PosteriorMatrix};
use chordseq_core::chord::{ClassId, NUM_CLASSES};
use chordseq_core::decode::{hashed_beam_search, viterbi, DecoderConfig};
use chordseq_core::eval::{logprob_report, wcsr};
use chordseq_core::markov::MarkovModel;
use chordseq_core::neural::{finite_difference_check, HasTensors};
use chordseq_core::rnnlm::{RnnLm, RnnLmConfig};

fn id(c: usize) -> ClassId {
    ClassId::new(c as u8).unwrap()
}

// ---------------------------------------------------------------------------
// Random instances over a reduced alphabet
// ---------------------------------------------------------------------------

fn random_posteriors<R: Rng>(frames: usize, k: usize, rng: &mut R) -> PosteriorMatrix {
    let rows = (0..frames)
        .map(|_| {
            let mut row = vec![0.0; NUM_CLASSES];
            let mut sum = 0.0;
            for v in row.iter_mut().take(k) {
                *v = rng.gen_range(0.05..1.0);
                sum += *v;
            }
            for v in row.iter_mut().take(k) {
                *v /= sum;
            }
            row
        })
        .collect();
    PosteriorMatrix::from_rows(rows).unwrap()
}

fn random_markov<R: Rng>(k: usize, rng: &mut R) -> MarkovModel {
    let normalize = |row: &mut [f64]| {
        let sum: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= sum;
        }
    };
    let mut pi = vec![0.0; NUM_CLASSES];
    for v in pi.iter_mut().take(k) {
        *v = rng.gen_range(0.05..1.0);
    }
    normalize(&mut pi);
    let mut a = vec![vec![1.0 / NUM_CLASSES as f64; NUM_CLASSES]; NUM_CLASSES];
    for row in a.iter_mut().take(k) {
        row.fill(0.0);
        for v in row.iter_mut().take(k) {
            *v = rng.gen_range(0.05..1.0);
        }
        normalize(row);
    }
    MarkovModel::from_parts(pi, a, 0.0).unwrap()
}

/// Independent scorer: straight table lookups, no shared code with decode.
fn oracle_path_score(path: &[usize], post: &PosteriorMatrix, model: &MarkovModel) -> f64 {
    let mut score = model.initial()[path[0]].ln() + post.row(0)[path[0]].ln();
    for t in 1..path.len() {
        score += model.transition_row(id(path[t - 1]))[path[t]].ln();
        score += post.row(t)[path[t]].ln();
    }
    score
}

/// Exhaustive argmax over all k^len paths.
fn oracle_best_path(post: &PosteriorMatrix, model: &MarkovModel, k: usize) -> (Vec<usize>, f64) {
    let len = post.frames();
    let mut best_path = vec![0usize; len];
    let mut best_score = f64::NEG_INFINITY;
    let mut digits = vec![0usize; len];
    loop {
        let score = oracle_path_score(&digits, post, model);
        if score > best_score {
            best_score = score;
            best_path = digits.clone();
        }
        let mut pos = 0;
        loop {
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
            pos += 1;
            if pos == len {
                return (best_path, best_score);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: Viterbi equals exhaustive search
// ---------------------------------------------------------------------------

#[test]
fn c1_decoder_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let config = DecoderConfig::default();
    let trials = 1000;
    let k = 3;
    for trial in 0..trials {
        let len = 2 + trial % 7; // lengths 2..=8
        let post = random_posteriors(len, k, &mut rng);
        let model = random_markov(k, &mut rng);
        let decoded = viterbi(&post, &model, &config).unwrap();
        let decoded_path: Vec<usize> = decoded.classes.iter().map(|c| c.index()).collect();
        let (oracle_path, oracle_score) = oracle_best_path(&post, &model, k);
        assert_eq!(
            decoded_path, oracle_path,
            "trial {trial}: viterbi disagrees with exhaustive search"
        );
        let decoded_score = oracle_path_score(&decoded_path, &post, &model);
        assert!((decoded_score - oracle_score).abs() < 1e-9);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "decoder exactness took {elapsed:?}, budget is one minute"
    );
    println!(
        "criterion 1 (decoder exactness): PASS - {trials}/{trials} instances matched in {:.1}s",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: beam soundness
// ---------------------------------------------------------------------------

#[test]
fn c2_beam_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let k = 3;

    // exhaustive beam reproduces viterbi exactly
    let wide = DecoderConfig {
        beam_width: 10_000,
        bin_cap: 10_000,
        ..DecoderConfig::default()
    };
    for trial in 0..200 {
        let len = 2 + trial % 7;
        let post = random_posteriors(len, k, &mut rng);
        let model = random_markov(k, &mut rng);
        let exact = viterbi(&post, &model, &wide).unwrap();
        let beamed = hashed_beam_search(&post, &model, &wide).unwrap();
        assert_eq!(
            exact.classes, beamed.classes,
            "trial {trial}: exhaustive beam must equal viterbi"
        );
    }

    // paper configuration: never above the optimum, and exact on >= 95%
    let paper = DecoderConfig::default();
    assert_eq!((paper.beam_width, paper.hash_len, paper.bin_cap), (25, 3, 4));
    let trials = 1000;
    let mut exact_hits = 0usize;
    for _ in 0..trials {
        let post = random_posteriors(8, k, &mut rng);
        let model = random_markov(k, &mut rng);
        let best = viterbi(&post, &model, &paper).unwrap();
        let beamed = hashed_beam_search(&post, &model, &paper).unwrap();
        let best_score =
            oracle_path_score(&best.classes.iter().map(|c| c.index()).collect::<Vec<_>>(), &post, &model);
        let beam_score = oracle_path_score(
            &beamed.classes.iter().map(|c| c.index()).collect::<Vec<_>>(),
            &post,
            &model,
        );
        assert!(
            beam_score <= best_score + 1e-12,
            "beam returned a score above the optimum"
        );
        if (best_score - beam_score).abs() <= 1e-9 {
            exact_hits += 1;
        }
    }
    assert!(
        exact_hits * 100 >= trials * 95,
        "beam matched the optimum on only {exact_hits}/{trials} instances"
    );
    println!(
        "criterion 2 (beam soundness): PASS - exhaustive beam exact, paper config optimal on {exact_hits}/{trials}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: gradient correctness of the full-size model
// ---------------------------------------------------------------------------

#[test]
fn c3_gradient_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let config = RnnLmConfig::default(); // 2 layers x 100 units, skip connections
    assert_eq!((config.num_layers, config.hidden_size), (2, 100));
    assert!(config.skip_connections);

    let mut model = RnnLm::new(config, &mut rng).unwrap();
    // the output layer starts at zero, which would zero all upstream
    // gradients; give it small random values so every path carries signal
    for tensor in model.tensors_mut() {
        if tensor.data().iter().all(|&v| v == 0.0) {
            for v in tensor.data_mut() {
                *v = rng.gen_range(-0.3..0.3);
            }
        }
    }

    let sequence: Vec<ClassId> = [3u8, 19, 24].iter().map(|&c| id(c as usize)).collect();
    model.accumulate_gradients(&sequence);
    let analytic = model.grad_snapshot();
    let total: usize = analytic.iter().map(|g| g.len()).sum();

    let report = finite_difference_check(&model, &analytic, |m: &RnnLm| m.mean_loss(&sequence), 1e-5);
    assert!(
        report.max_rel_err < 1e-4,
        "max relative error {} at {}[{}] over {} parameters",
        report.max_rel_err,
        report.worst_tensor,
        report.worst_index,
        report.checked
    );
    assert_eq!(report.checked, total);
    println!(
        "criterion 3 (gradient correctness): PASS - {} parameters, max rel err {:.2e}, {:.0}s",
        report.checked,
        report.max_rel_err,
        start.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: probability normalization
// ---------------------------------------------------------------------------

#[test]
fn c4_probability_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);

    // Markov rows over random corpora
    for _ in 0..50 {
        let corpus: Vec<Vec<ClassId>> = (0..rng.gen_range(1..6))
            .map(|_| (0..rng.gen_range(1..40)).map(|_| id(rng.gen_range(0..25))).collect())
            .collect();
        let model = MarkovModel::fit(&corpus, rng.gen_range(0.01..5.0)).unwrap();
        assert!((model.initial().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for c in ClassId::all() {
            let sum: f64 = model.transition_row(c).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    // RNN softmax outputs under random parameters
    for seed in 0..10u64 {
        let mut model_rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = RnnLmConfig {
            hidden_size: 12,
            ..RnnLmConfig::default()
        };
        let mut model = RnnLm::new(cfg, &mut model_rng).unwrap();
        for tensor in model.tensors_mut() {
            if tensor.data().iter().all(|&v| v == 0.0) {
                for v in tensor.data_mut() {
                    *v = model_rng.gen_range(-2.0..2.0);
                }
            }
        }
        let mut state = model.start_lm_state();
        let mut prev = ClassId::NO_CHORD;
        for _ in 0..8 {
            let (dist, next) = model.score_next(&state, prev);
            let sum: f64 = dist.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "softmax sum {sum}");
            assert!(dist.iter().all(|&p| p > 0.0));
            prev = id(model_rng.gen_range(0..25));
            state = next;
        }
    }

    // posterior rows from a random classifier
    let clf_cfg = ClassifierConfig::logreg();
    let mut clf = FrameClassifier::new(25, &clf_cfg, &mut rng).unwrap();
    let _ = &mut clf;
    let mut features = FeatureMatrix::new(50, 25);
    for t in 0..50 {
        for v in features.row_mut(t) {
            *v = rng.gen_range(-3.0..3.0);
        }
    }
    let posteriors = clf.predict_posteriors(&features).unwrap();
    for t in 0..posteriors.frames() {
        let sum: f64 = posteriors.row(t).iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    // total probability mass by exhaustive enumeration, Markov side:
    // alphabet 4, length 5
    let corpus: Vec<Vec<ClassId>> = (0..4)
        .map(|_| (0..30).map(|_| id(rng.gen_range(0..4))).collect())
        .collect();
    let markov = MarkovModel::fit(&corpus, 1.0).unwrap();
    // a smoothed model spreads mass over all 25 classes; enumerate all of
    // them at length 3 for an exact unit total
    let mut mass = 0.0;
    let mut digits = [0usize; 3];
    'outer: loop {
        let seq: Vec<ClassId> = digits.iter().map(|&d| id(d)).collect();
        mass += markov.sequence_logprob(&seq).exp();
        let mut pos = 0;
        loop {
            digits[pos] += 1;
            if digits[pos] < NUM_CLASSES {
                break;
            }
            digits[pos] = 0;
            pos += 1;
            if pos == 3 {
                break 'outer;
            }
        }
    }
    assert!((mass - 1.0).abs() < 1e-9, "markov mass over all length-3 sequences: {mass}");

    // and the RNN side at length 2 over the full alphabet
    let mut model_rng = ChaCha8Rng::seed_from_u64(99);
    let cfg = RnnLmConfig {
        hidden_size: 6,
        ..RnnLmConfig::default()
    };
    let mut lm = RnnLm::new(cfg, &mut model_rng).unwrap();
    for tensor in lm.tensors_mut() {
        if tensor.data().iter().all(|&v| v == 0.0) {
            for v in tensor.data_mut() {
                *v = model_rng.gen_range(-1.0..1.0);
            }
        }
    }
    let mut mass = 0.0;
    for a in 0..NUM_CLASSES {
        for b in 0..NUM_CLASSES {
            mass += lm.sequence_logprob(&[id(a), id(b)]).exp();
        }
    }
    assert!((mass - 1.0).abs() < 1e-9, "rnn mass over all length-2 sequences: {mass}");

    println!("criterion 4 (probability normalization): PASS - rows, softmax, and total mass within 1e-9");
}

// ---------------------------------------------------------------------------
// Criterion 5: experiment-1 futility property
// ---------------------------------------------------------------------------

fn exp1_acceptance_config() -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.seed = 1001;
    config.synth.train_songs = 20;
    config.synth.test_songs = 6;
    config.synth.song_len_s = (40.0, 60.0);
    config.synth.self_transition = 0.97;
    config.synth.lead_silence_s = 0.5;
    config.markov.alpha = 1.0;
    config.rnn.hidden_size = 32;
    config.rnn.max_epochs = 40;
    config.rnn.lr0 = 0.01;
    config.rnn.patience = 12;
    config
}

#[test]
fn c5_exp1_futility() {
    let start = Instant::now();
    let config = exp1_acceptance_config();
    assert!(config.synth.self_transition >= 0.95);
    let report = run_exp1(&config).unwrap();

    let l_mc = report.markov.avg();
    let l_rnn = report.rnn.avg();
    let gap = (l_rnn - l_mc).abs();
    assert!(
        gap <= 0.02,
        "|L_rnn - L_mc| = |{l_rnn:.4} - {l_mc:.4}| = {gap:.4} exceeds 0.02 nats"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1800, "exp1 took {elapsed:?}, budget is 30 minutes");
    println!(
        "criterion 5 (exp1 futility): PASS - L_mc {l_mc:.4}, L_rnn {l_rnn:.4}, gap {gap:.4} <= 0.02 in {:.0}s",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: experiment-2 ordering property
// ---------------------------------------------------------------------------

#[test]
fn c6_exp2_ordering() {
    let mut config = ExperimentConfig::default();
    config.seed = 2002;
    config.synth.train_songs = 20;
    config.synth.test_songs = 6;
    config.synth.song_len_s = (30.0, 50.0);
    config.synth.self_transition = 0.95;
    config.synth.noise_sigma = 0.5;
    config.acoustic.max_epochs = 40;
    config.acoustic.lr0 = 0.2;
    config.acoustic.patience = 40;
    config.acoustic.mlp_hidden_layers = 2;
    config.acoustic.mlp_hidden_size = 32;
    config.rnn.hidden_size = 32;
    config.rnn.max_epochs = 40;
    config.rnn.lr0 = 0.01;
    config.rnn.patience = 12;

    let report = run_exp2(&config).unwrap();
    for (acoustic, cells) in &report.rows {
        let [none, mv, hmm, rnn] = *cells;
        assert!(
            none <= mv && mv <= hmm,
            "{acoustic}: ordering violated: none {none:.2}, mv {mv:.2}, hmm {hmm:.2}"
        );
        assert!(
            hmm - none >= 0.5,
            "{acoustic}: hmm {hmm:.2} beats none {none:.2} by less than 0.5 points"
        );
        assert!(
            (rnn - hmm).abs() <= 1.0,
            "{acoustic}: |rnn {rnn:.2} - hmm {hmm:.2}| exceeds 1.0 point"
        );
        println!(
            "criterion 6 (exp2 ordering, {acoustic}): PASS - none {none:.2} <= mv {mv:.2} <= hmm {hmm:.2}, rnn {rnn:.2}"
        );
    }
}

// ---------------------------------------------------------------------------
// Criterion 7: experiment-3 separation property
// ---------------------------------------------------------------------------

/// Best possible first-order average log-probability on this very dataset
/// (maximum-likelihood tables fitted to it; zero-count cells never occur in
/// its own support).
fn first_order_optimum(dataset: &[Vec<ClassId>]) -> f64 {
    let mut first = [0.0f64; NUM_CLASSES];
    let mut trans = [[0.0f64; NUM_CLASSES]; NUM_CLASSES];
    let mut symbols = 0usize;
    for seq in dataset {
        if let Some(&y0) = seq.first() {
            first[y0.index()] += 1.0;
        }
        for pair in seq.windows(2) {
            trans[pair[0].index()][pair[1].index()] += 1.0;
        }
        symbols += seq.len();
    }
    let n_first: f64 = first.iter().sum();
    let mut total = 0.0;
    for &c in &first {
        if c > 0.0 {
            total += c * (c / n_first).ln();
        }
    }
    for row in &trans {
        let row_total: f64 = row.iter().sum();
        for &c in row {
            if c > 0.0 {
                total += c * (c / row_total).ln();
            }
        }
    }
    total / symbols as f64
}

#[test]
fn c7_exp3_separation() {
    // second-order grammar: C appears three times in the cycle with three
    // different successors, so any first-order model must split that mass
    let mut config = ExperimentConfig::default();
    config.seed = 3003;
    config.trace_songs = 0;
    config.synth.train_songs = 30;
    config.synth.test_songs = 8;
    config.synth.song_len_s = (90.0, 120.0);
    config.synth.self_transition = 0.95;
    config.synth.lead_silence_s = 0.0;
    config.synth.grammar = Some(vec![
        "C:maj".into(),
        "G:maj".into(),
        "C:maj".into(),
        "F:maj".into(),
        "C:maj".into(),
        "A:min".into(),
    ]);
    config.rnn.hidden_size = 48;
    config.rnn.max_epochs = 150;
    config.rnn.lr0 = 0.02;
    config.rnn.patience = 30;

    let report = run_exp3(&config).unwrap();
    let l_rnn = report.rnn.avg();

    // the Markov bound comes from brute-force-fitting the test set itself
    let corpus = chordseq_cli::experiments::prepare_corpus(&config, false).unwrap();
    let test_refs: Vec<&chordseq_core::dataset::AnnotationTrack> = corpus.test.iter().collect();
    let test = chordseq_cli::experiments::chord_sequences(&test_refs).unwrap();
    let mc_bound = first_order_optimum(&test);
    let trained_mc = report.markov.avg();
    assert!(
        trained_mc <= mc_bound + 1e-9,
        "the trained chain ({trained_mc:.4}) cannot beat the oracle bound ({mc_bound:.4})"
    );

    let separation = l_rnn - mc_bound;
    assert!(
        separation >= 0.3,
        "L_rnn {l_rnn:.4} exceeds the first-order optimum {mc_bound:.4} by only {separation:.4} nats"
    );
    println!(
        "criterion 7a (exp3 separation): PASS - L_rnn {l_rnn:.4} vs first-order bound {mc_bound:.4} (gap {separation:.4})"
    );
}

#[test]
fn c7_exp3_repetition_traces() {
    // per-song progressions: repetitions of a new progression should score
    // higher once the model has seen the progression within the song
    let mut config = ExperimentConfig::default();
    config.seed = 3004;
    config.trace_songs = 0;
    config.synth.train_songs = 40;
    config.synth.test_songs = 8;
    config.synth.song_len_s = (60.0, 80.0);
    config.synth.self_transition = 0.95;
    config.synth.lead_silence_s = 0.0;
    config.synth.progression_len = Some(4);
    config.rnn.hidden_size = 64;
    config.rnn.max_epochs = 200;
    config.rnn.lr0 = 0.02;
    config.rnn.patience = 40;

    let corpus = chordseq_cli::experiments::prepare_corpus(&config, false).unwrap();
    let fit_refs: Vec<&chordseq_core::dataset::AnnotationTrack> = corpus.fit.iter().collect();
    let val_refs: Vec<&chordseq_core::dataset::AnnotationTrack> = corpus.validation.iter().collect();
    let test_refs: Vec<&chordseq_core::dataset::AnnotationTrack> = corpus.test.iter().collect();
    let fit = chordseq_cli::experiments::chord_sequences(&fit_refs).unwrap();
    let validation = chordseq_cli::experiments::chord_sequences(&val_refs).unwrap();
    let test = chordseq_cli::experiments::chord_sequences(&test_refs).unwrap();

    let mut rng = chordseq_cli::experiments::rng_for(config.seed, 2);
    let (model, _) =
        chordseq_core::rnnlm::train(&fit, &validation, config.rnn.to_config(), &mut rng).unwrap();

    let mut rep1 = Vec::new();
    let mut rep3 = Vec::new();
    for seq in &test {
        if seq.len() < 12 {
            continue;
        }
        let lps = model.per_symbol_logprobs(seq);
        rep1.extend_from_slice(&lps[0..4]);
        rep3.extend_from_slice(&lps[8..12]);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let first = mean(&rep1);
    let third = mean(&rep3);
    assert!(
        third > first,
        "third repetition ({third:.4}) should outscore the first ({first:.4})"
    );
    println!(
        "criterion 7b (exp3 repetition): PASS - first repetition {first:.4}, third {third:.4}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: metric oracles
// ---------------------------------------------------------------------------

fn two_significant_figures(x: f64) -> f64 {
    let magnitude = x.abs().log10().floor();
    let scale = 10f64.powf(magnitude - 1.0);
    (x / scale).round() * scale
}

#[test]
fn c8_metric_oracles() {
    // WCSR hand cases, exact to 1e-12
    let identical = wcsr(
        &[(1, vec![(0.0, 2.0, id(0)), (2.0, 4.0, id(7))])],
        &[(1, vec![(0.0, 2.0, id(0)), (2.0, 4.0, id(7))])],
    )
    .unwrap();
    assert!((identical.recall() - 1.0).abs() < 1e-12);

    let halves = wcsr(
        &[(1, vec![(0.0, 2.0, id(0)), (2.0, 4.0, id(7))])],
        &[(1, vec![(0.0, 4.0, id(0))])],
    )
    .unwrap();
    assert!((halves.recall() - 0.5).abs() < 1e-12);

    let partial = wcsr(
        &[(1, vec![(0.0, 10.0, id(3))])],
        &[(1, vec![(0.0, 7.89, id(3)), (7.89, 10.0, id(4))])],
    )
    .unwrap();
    assert!((partial.recall() - 0.789).abs() < 1e-12);

    // report recomposition identity, exact at the sum level
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let corpus: Vec<Vec<ClassId>> = (0..5)
        .map(|_| (0..rng.gen_range(2..40)).map(|_| id(rng.gen_range(0..25))).collect())
        .collect();
    let model = MarkovModel::fit(&corpus, 1.0).unwrap();
    let report = logprob_report(&model, &corpus);
    assert_eq!(
        report.total_logprob(),
        report.sum_first + report.sum_stay + report.sum_change
    );
    assert_eq!(
        report.total_symbols(),
        report.n_first + report.n_stay + report.n_change
    );
    let direct: f64 = corpus.iter().map(|s| model.sequence_logprob(s)).sum();
    assert!((report.total_logprob() - direct).abs() < 1e-9);

    // published chord-change likelihoods against their exponentials
    assert_eq!(two_significant_figures((-5.420f64).exp()), 0.0044);
    assert_eq!(two_significant_figures((-5.219f64).exp()), 0.0054);

    println!("criterion 8 (metric oracles): PASS - WCSR hand cases, recomposition, change-probability exponentials");
}

// ---------------------------------------------------------------------------
// Criterion 9: optional corpus replication
// ---------------------------------------------------------------------------

#[test]
fn c9_optional_replication() {
    let Some(dir) = std::env::var_os("CHORDSEQ_BILLBOARD_DIR") else {
        println!(
            "criterion 9 (optional replication): SKIPPED - set CHORDSEQ_BILLBOARD_DIR to a corpus directory to enable"
        );
        return;
    };
    let dir = std::path::PathBuf::from(dir);
    let mut deviations: Vec<String> = Vec::new();

    let tracks = chordseq_core::dataset::load_corpus(&dir).expect("corpus loads");
    let split = chordseq_core::dataset::split_corpus(&tracks);
    let unique = split.train.len() + split.test.len();
    for (what, got, want) in [
        ("unique songs", unique, 742),
        ("training songs", split.train.len(), 571),
        ("test songs", split.test.len(), 171),
    ] {
        if got != want {
            deviations.push(format!("{what}: got {got}, published value {want}"));
        }
    }

    let mut config = ExperimentConfig::default();
    config.corpus.dir = Some(dir);
    config.pin_paper_defaults();

    let exp1 = run_exp1(&config).expect("exp1 runs");
    let frame_targets = [
        ("markov L", exp1.markov.avg(), -0.273, 0.02),
        ("markov L_c", exp1.markov.avg_change(), -5.420, 0.25),
        ("markov L_s", exp1.markov.avg_stay(), -0.044, 0.02),
        ("rnn L", exp1.rnn.avg(), -0.266, 0.02),
        ("rnn L_c", exp1.rnn.avg_change(), -5.219, 0.25),
        ("rnn L_s", exp1.rnn.avg_stay(), -0.046, 0.02),
    ];
    for (what, got, want, tol) in frame_targets {
        if (got - want).abs() > tol {
            deviations.push(format!("{what}: got {got:.4}, published {want} (tol {tol})"));
        }
    }

    let exp3 = run_exp3(&config).expect("exp3 runs");
    for (what, got, want) in [
        ("chord-level markov L", exp3.markov.avg(), -2.28),
        ("chord-level rnn L", exp3.rnn.avg(), -1.62),
    ] {
        if (got - want).abs() > 0.15 {
            deviations.push(format!("{what}: got {got:.4}, published {want} (tol 0.15)"));
        }
    }

    if deviations.is_empty() {
        println!("criterion 9 (optional replication): PASS - split counts and published metrics reproduced");
    } else {
        let report = deviations.join("\n");
        std::fs::write("replication_deviations.txt", &report).ok();
        println!(
            "criterion 9 (optional replication): DEVIATIONS (non-fatal, see replication_deviations.txt)\n{report}"
        );
    }
}
