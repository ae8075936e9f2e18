//! First-order Markov chain over the 25 chord classes.
//!
//! The initial distribution and the transition matrix are estimated by
//! counting, with optional additive smoothing. Pure counting (`alpha = 0`)
//! leaves classes that never occur as transition sources with all-zero rows;
//! such a model scores any sequence crossing those rows at minus infinity.
//! Held-out evaluation therefore wants smoothing; the conventional default
//! here is `alpha = 1.0`.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::chord::{ClassId, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::temporal::TemporalModel;

/// Default additive smoothing count.
pub const DEFAULT_SMOOTHING: f64 = 1.0;

/// First-order model: `pi[i] = P(y_1 = i)`, `a[i][j] = P(y_k = j | y_{k-1} = i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    pi: Vec<f64>,
    a: Vec<Vec<f64>>,
    alpha: f64,
}

impl MarkovModel {
    /// Estimate from class-id sequences by counting first symbols and
    /// transitions, adding `alpha` to every count.
    ///
    /// With `alpha = 0`, a class never observed as a transition source keeps
    /// an all-zero (degenerate) row; stepping through it yields `-inf`
    /// log-probabilities. With `alpha > 0` every row is strictly positive.
    pub fn fit<S: AsRef<[ClassId]>>(sequences: &[S], alpha: f64) -> Result<Self> {
        if alpha < 0.0 || !alpha.is_finite() {
            return Err(Error::contract(format!("smoothing count {alpha} must be >= 0")));
        }
        if sequences.iter().all(|s| s.as_ref().is_empty()) {
            return Err(Error::contract("fit needs at least one non-empty sequence"));
        }

        let mut first = [0.0f64; NUM_CLASSES];
        let mut trans = [[0.0f64; NUM_CLASSES]; NUM_CLASSES];
        for seq in sequences {
            let seq = seq.as_ref();
            if let Some(&y0) = seq.first() {
                first[y0.index()] += 1.0;
            }
            for pair in seq.windows(2) {
                trans[pair[0].index()][pair[1].index()] += 1.0;
            }
        }

        let pi_total: f64 = first.iter().sum::<f64>() + alpha * NUM_CLASSES as f64;
        let pi: Vec<f64> = first.iter().map(|&c| (c + alpha) / pi_total).collect();

        let a: Vec<Vec<f64>> = trans
            .iter()
            .map(|row| {
                let total: f64 = row.iter().sum::<f64>() + alpha * NUM_CLASSES as f64;
                if total == 0.0 {
                    // degenerate row from pure counting
                    vec![0.0; NUM_CLASSES]
                } else {
                    row.iter().map(|&c| (c + alpha) / total).collect()
                }
            })
            .collect();

        Ok(MarkovModel { pi, a, alpha })
    }

    /// Uniform model: every entry 1/25.
    pub fn uniform() -> Self {
        let u = 1.0 / NUM_CLASSES as f64;
        MarkovModel {
            pi: vec![u; NUM_CLASSES],
            a: vec![vec![u; NUM_CLASSES]; NUM_CLASSES],
            alpha: 0.0,
        }
    }

    /// Build directly from given distributions. Every row must sum to 1
    /// within 1e-9; an exactly all-zero transition row is also accepted as
    /// the degenerate unsmoothed case.
    pub fn from_parts(pi: Vec<f64>, a: Vec<Vec<f64>>, alpha: f64) -> Result<Self> {
        let check_row = |row: &[f64], what: &str, allow_zero: bool| -> Result<()> {
            if row.len() != NUM_CLASSES {
                return Err(Error::contract(format!("{what} must have {NUM_CLASSES} entries")));
            }
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::contract(format!("{what} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 && !(allow_zero && sum == 0.0) {
                return Err(Error::contract(format!("{what} sums to {sum}, expected 1")));
            }
            Ok(())
        };
        check_row(&pi, "pi", false)?;
        if a.len() != NUM_CLASSES {
            return Err(Error::contract(format!("a must have {NUM_CLASSES} rows")));
        }
        for (i, row) in a.iter().enumerate() {
            check_row(row, &format!("transition row {i}"), true)?;
        }
        Ok(MarkovModel { pi, a, alpha })
    }

    pub fn initial(&self) -> &[f64] {
        &self.pi
    }

    pub fn transition_row(&self, from: ClassId) -> &[f64] {
        &self.a[from.index()]
    }

    pub fn smoothing(&self) -> f64 {
        self.alpha
    }

    /// Sequence log-probability from the direct formula
    /// `log pi[y_1] + sum_k log a[y_{k-1}][y_k]`, entirely in log space.
    /// A zero-probability step yields `-inf`, not an error.
    pub fn sequence_logprob(&self, sequence: &[ClassId]) -> f64 {
        let Some(&first) = sequence.first() else {
            return 0.0;
        };
        let mut total = self.pi[first.index()].ln();
        for pair in sequence.windows(2) {
            total += self.a[pair[0].index()][pair[1].index()].ln();
        }
        total
    }

    // -----------------------------------------------------------------------
    // Serialization: versioned text, pi row then 25 transition rows
    // -----------------------------------------------------------------------

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "chordseq-markov v1 classes={NUM_CLASSES} alpha={}", self.alpha)?;
        writeln!(f, "{}", join_row(&self.pi))?;
        for row in &self.a {
            writeln!(f, "{}", join_row(row))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let bad = |line: usize, reason: String| Error::DataFormat {
            file: path.to_path_buf(),
            line,
            reason,
        };

        let mut lines = BufReader::new(file).lines().enumerate();
        let header = match lines.next() {
            Some((_, Ok(h))) => h,
            Some((_, Err(e))) => return Err(Error::Io(e)),
            None => return Err(bad(1, "empty file".into())),
        };
        let mut fields = header.split_whitespace();
        if fields.next() != Some("chordseq-markov") || fields.next() != Some("v1") {
            return Err(bad(1, format!("unrecognized header {header:?}")));
        }
        let mut alpha = 0.0;
        for field in fields {
            if let Some(v) = field.strip_prefix("alpha=") {
                alpha = v.parse().map_err(|_| bad(1, format!("bad alpha {v:?}")))?;
            }
        }

        let mut rows = Vec::with_capacity(NUM_CLASSES + 1);
        for (i, line) in lines {
            let line = line.map_err(Error::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(i + 1, format!("bad number: {e}")))?;
            if row.len() != NUM_CLASSES {
                return Err(bad(
                    i + 1,
                    format!("expected {NUM_CLASSES} values, found {}", row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != NUM_CLASSES + 1 {
            return Err(bad(0, format!("expected {} rows, found {}", NUM_CLASSES + 1, rows.len())));
        }
        let pi = rows.remove(0);
        MarkovModel::from_parts(pi, rows, alpha)
    }
}

fn join_row(row: &[f64]) -> String {
    row.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Stepping state: before the first symbol the model answers with `pi`,
/// afterwards with the transition row of the fed symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkovState {
    Initial,
    Conditioned,
}

impl TemporalModel for MarkovModel {
    type State = MarkovState;

    fn start_state(&self) -> MarkovState {
        MarkovState::Initial
    }

    fn step(&self, state: &MarkovState, input: ClassId) -> ([f64; NUM_CLASSES], MarkovState) {
        let row = match state {
            MarkovState::Initial => &self.pi,
            MarkovState::Conditioned => &self.a[input.index()],
        };
        let mut dist = [0.0; NUM_CLASSES];
        for (d, &p) in dist.iter_mut().zip(row.iter()) {
            *d = p.ln();
        }
        (dist, MarkovState::Conditioned)
    }
}
