//! Decoders connecting frame posteriors to label sequences.
//!
//! Three temporal treatments of increasing complexity: a majority vote over
//! a short context, exact Viterbi decoding against a first-order model, and
//! hashed beam search for scorers whose state depends on the whole history.
//!
//! Everything is scored in natural-log space as
//! `sum_t emission(t, y_t) + lm_weight * log P_LM(y)`, where the emission is
//! the log posterior, optionally divided by class priors. Tie-breaking is
//! total (score, then lexicographically earlier label sequence), so decoding
//! is bit-reproducible.

use std::collections::BTreeMap;

use crate::acoustic::PosteriorMatrix;
use crate::chord::{ClassId, NUM_CLASSES};
use crate::dataset::FrameSequence;
use crate::error::{Error, Result};
use crate::markov::MarkovModel;
use crate::temporal::TemporalModel;
use crate::FRAME_RATE_HZ;

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderConfig {
    pub beam_width: usize,
    /// Hypotheses are binned by their last `hash_len` symbols.
    pub hash_len: usize,
    /// At most this many hypotheses survive per hash bin.
    pub bin_cap: usize,
    /// Majority-vote context in seconds.
    pub mv_window_s: f64,
    /// Weight on the language-model term.
    pub lm_weight: f64,
    /// When set, emissions become `log posterior - log prior` (hybrid-style
    /// correction); entries must be positive and length 25.
    pub class_priors: Option<Vec<f64>>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            beam_width: 25,
            hash_len: 3,
            bin_cap: 4,
            mv_window_s: 1.3,
            lm_weight: 1.0,
            class_priors: None,
        }
    }
}

impl DecoderConfig {
    fn validate(&self) -> Result<()> {
        if self.beam_width == 0 || self.hash_len == 0 || self.bin_cap == 0 {
            return Err(Error::contract("beam width, hash length, and bin cap must be positive"));
        }
        if self.bin_cap > self.beam_width {
            return Err(Error::contract("bin cap cannot exceed the beam width"));
        }
        if !self.mv_window_s.is_finite() || self.mv_window_s <= 0.0 || !self.lm_weight.is_finite() {
            return Err(Error::contract("bad majority-vote window or lm weight"));
        }
        if let Some(p) = &self.class_priors {
            if p.len() != NUM_CLASSES || p.iter().any(|&v| !v.is_finite() || v <= 0.0) {
                return Err(Error::contract("class priors need 25 positive entries"));
            }
        }
        Ok(())
    }

    /// Per-frame emission scores: log posterior, minus log prior when that
    /// correction is switched on.
    fn emissions(&self, post: &PosteriorMatrix) -> Vec<[f64; NUM_CLASSES]> {
        let log_priors: Option<Vec<f64>> = self
            .class_priors
            .as_ref()
            .map(|p| p.iter().map(|&v| v.ln()).collect());
        (0..post.frames())
            .map(|t| {
                let row = post.row(t);
                let mut out = [0.0; NUM_CLASSES];
                for (c, o) in out.iter_mut().enumerate() {
                    *o = row[c].ln();
                    if let Some(lp) = &log_priors {
                        *o -= lp[c];
                    }
                }
                out
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Majority vote
// ---------------------------------------------------------------------------

/// Frame-wise argmax labels smoothed by a centered majority vote. Window
/// ties go to the label with the larger posterior mass inside the window,
/// then to the lower class id. Windows are truncated at the edges.
pub fn majority_vote(post: &PosteriorMatrix, config: &DecoderConfig) -> FrameSequence {
    let n = post.frames();
    let argmax = post.argmax_frames();
    if n == 0 {
        return argmax;
    }
    let half = ((config.mv_window_s * FRAME_RATE_HZ).round() as usize) / 2;

    let classes = (0..n)
        .map(|t| {
            let lo = t.saturating_sub(half);
            let hi = (t + half).min(n - 1);
            let mut counts = [0u32; NUM_CLASSES];
            for w in lo..=hi {
                counts[argmax.classes[w].index()] += 1;
            }
            let top = *counts.iter().max().unwrap();
            let mut best: Option<(usize, f64)> = None;
            for (c, &count) in counts.iter().enumerate() {
                if count != top {
                    continue;
                }
                let mass: f64 = (lo..=hi).map(|w| post.row(w)[c]).sum();
                match best {
                    Some((_, best_mass)) if mass <= best_mass => {}
                    _ => best = Some((c, mass)),
                }
            }
            ClassId::new(best.unwrap().0 as u8).unwrap()
        })
        .collect();
    FrameSequence { classes }
}

// ---------------------------------------------------------------------------
// Viterbi
// ---------------------------------------------------------------------------

/// Exact argmax decoding of `sum emissions + lm_weight * (log pi + sum log A)`
/// by dynamic programming. Ties prefer the lower class id.
pub fn viterbi(
    post: &PosteriorMatrix,
    model: &MarkovModel,
    config: &DecoderConfig,
) -> Result<FrameSequence> {
    config.validate()?;
    let n = post.frames();
    if n == 0 {
        return Ok(FrameSequence { classes: Vec::new() });
    }
    let emit = config.emissions(post);
    let lambda = config.lm_weight;

    let log_pi: Vec<f64> = model.initial().iter().map(|&p| p.ln()).collect();
    let mut log_a = vec![[0.0f64; NUM_CLASSES]; NUM_CLASSES];
    for (i, row) in log_a.iter_mut().enumerate() {
        let src = model.transition_row(ClassId::new(i as u8).unwrap());
        for (j, v) in row.iter_mut().enumerate() {
            *v = src[j].ln();
        }
    }

    let mut delta = vec![[f64::NEG_INFINITY; NUM_CLASSES]; n];
    let mut psi = vec![[0usize; NUM_CLASSES]; n];
    for j in 0..NUM_CLASSES {
        delta[0][j] = lambda * log_pi[j] + emit[0][j];
    }
    for t in 1..n {
        for j in 0..NUM_CLASSES {
            let mut best_score = f64::NEG_INFINITY;
            let mut best_prev = 0usize;
            for i in 0..NUM_CLASSES {
                let s = delta[t - 1][i] + lambda * log_a[i][j];
                if s > best_score {
                    best_score = s;
                    best_prev = i;
                }
            }
            delta[t][j] = best_score + emit[t][j];
            psi[t][j] = best_prev;
        }
        if delta[t].iter().all(|&v| v == f64::NEG_INFINITY) {
            return Err(Error::Decode {
                frame: t,
                reason: "every continuation has probability zero".to_string(),
            });
        }
    }

    let mut best_final = 0usize;
    for j in 1..NUM_CLASSES {
        if delta[n - 1][j] > delta[n - 1][best_final] {
            best_final = j;
        }
    }
    if delta[n - 1][best_final] == f64::NEG_INFINITY {
        return Err(Error::Decode {
            frame: n - 1,
            reason: "every path has probability zero".to_string(),
        });
    }

    let mut path = vec![0usize; n];
    path[n - 1] = best_final;
    for t in (0..n - 1).rev() {
        path[t] = psi[t + 1][path[t + 1]];
    }
    Ok(FrameSequence {
        classes: path
            .into_iter()
            .map(|c| ClassId::new(c as u8).unwrap())
            .collect(),
    })
}

/// Score a label path under the first-order objective that [`viterbi`]
/// maximizes, accumulating in the same order as the DP so that the optimum
/// path reproduces the DP score bit for bit.
pub fn path_score(
    path: &[ClassId],
    post: &PosteriorMatrix,
    model: &MarkovModel,
    config: &DecoderConfig,
) -> f64 {
    let emit = config.emissions(post);
    let lambda = config.lm_weight;
    let Some(&first) = path.first() else {
        return 0.0;
    };
    let mut score = lambda * model.initial()[first.index()].ln() + emit[0][first.index()];
    for (t, pair) in path.windows(2).enumerate() {
        score += lambda * model.transition_row(pair[0])[pair[1].index()].ln();
        score += emit[t + 1][pair[1].index()];
    }
    score
}

// ---------------------------------------------------------------------------
// Hashed beam search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Hypothesis<S> {
    symbols: Vec<ClassId>,
    /// Scorer state after consuming everything up to (excluding) `last`.
    state: S,
    /// The symbol to feed on the next step (no-chord start convention).
    last: ClassId,
    score: f64,
}

/// Approximate decoding for scorers with unbounded history: every hypothesis
/// is extended by all 25 symbols each frame, hypotheses are binned by their
/// last `hash_len` symbols, each bin keeps its `bin_cap` best, and the best
/// `beam_width` survivors overall continue. The highest-scoring complete
/// hypothesis wins.
pub fn hashed_beam_search<M: TemporalModel>(
    post: &PosteriorMatrix,
    scorer: &M,
    config: &DecoderConfig,
) -> Result<FrameSequence> {
    config.validate()?;
    let n = post.frames();
    if n == 0 {
        return Ok(FrameSequence { classes: Vec::new() });
    }
    let emit = config.emissions(post);
    let lambda = config.lm_weight;

    let mut beam = vec![Hypothesis {
        symbols: Vec::new(),
        state: scorer.start_state(),
        last: ClassId::NO_CHORD,
        score: 0.0,
    }];

    for (t, frame_emit) in emit.iter().enumerate() {
        let mut candidates: Vec<Hypothesis<M::State>> =
            Vec::with_capacity(beam.len() * NUM_CLASSES);
        for hyp in &beam {
            let (logdist, next_state) = scorer.step(&hyp.state, hyp.last);
            for c in 0..NUM_CLASSES {
                let score = hyp.score + (frame_emit[c] + lambda * logdist[c]);
                if !score.is_finite() {
                    continue;
                }
                let mut symbols = Vec::with_capacity(hyp.symbols.len() + 1);
                symbols.extend_from_slice(&hyp.symbols);
                let class = ClassId::new(c as u8).unwrap();
                symbols.push(class);
                candidates.push(Hypothesis {
                    symbols,
                    state: next_state.clone(),
                    last: class,
                    score,
                });
            }
        }
        if candidates.is_empty() {
            return Err(Error::Decode {
                frame: t,
                reason: "beam emptied: every extension has probability zero".to_string(),
            });
        }

        // Best-first with total tie-breaking, then a single sweep that
        // enforces the per-bin cap before the global beam limit.
        candidates.sort_unstable_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("scores are finite")
                .then_with(|| a.symbols.cmp(&b.symbols))
        });
        let mut bins: BTreeMap<&[ClassId], usize> = BTreeMap::new();
        let mut kept: Vec<usize> = Vec::with_capacity(config.beam_width);
        for (idx, cand) in candidates.iter().enumerate() {
            let key_start = cand.symbols.len().saturating_sub(config.hash_len);
            let key = &cand.symbols[key_start..];
            let occupancy = bins.entry(key).or_insert(0);
            if *occupancy >= config.bin_cap {
                continue;
            }
            *occupancy += 1;
            kept.push(idx);
            if kept.len() == config.beam_width {
                break;
            }
        }
        drop(bins);

        let mut next_beam = Vec::with_capacity(kept.len());
        for idx in kept.into_iter().rev() {
            next_beam.push(candidates.swap_remove(idx));
        }
        next_beam.reverse();
        beam = next_beam;
    }

    // the beam is sorted best-first after the final prune
    Ok(FrameSequence {
        classes: beam.swap_remove(0).symbols,
    })
}
