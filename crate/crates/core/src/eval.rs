//! Evaluation metrics: average log-probability partitions and Weighted
//! Chord Symbol Recall.
//!
//! The log-probability report splits per-symbol scores into three groups:
//! the first symbol of each sequence, positions where the symbol repeats the
//! previous one (stays), and positions where it differs (changes). First
//! symbols belong to neither the stay nor the change partition but still
//! count toward the overall average.
//!
//! WCSR is computed on the continuous interval timeline (segment
//! intersections), not on frame grids, and is aggregated over songs before
//! the final division.

use std::collections::BTreeMap;
use std::fmt;

use crate::chord::ClassId;
use crate::error::{Error, Result};
use crate::temporal::TemporalModel;

// ---------------------------------------------------------------------------
// Log-probability report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct LogProbReport {
    pub n_first: usize,
    pub n_stay: usize,
    pub n_change: usize,
    pub sum_first: f64,
    pub sum_stay: f64,
    pub sum_change: f64,
}

impl LogProbReport {
    pub fn total_symbols(&self) -> usize {
        self.n_first + self.n_stay + self.n_change
    }

    /// Total log-probability; by construction exactly the sum of the three
    /// partition sums.
    pub fn total_logprob(&self) -> f64 {
        self.sum_first + self.sum_stay + self.sum_change
    }

    /// Average log-probability per symbol over everything.
    pub fn avg(&self) -> f64 {
        self.total_logprob() / self.total_symbols() as f64
    }

    /// Average at chord-change positions.
    pub fn avg_change(&self) -> f64 {
        self.sum_change / self.n_change as f64
    }

    /// Average at chord-stay positions.
    pub fn avg_stay(&self) -> f64 {
        self.sum_stay / self.n_stay as f64
    }

    /// Average over first symbols (outside both partitions above).
    pub fn avg_first(&self) -> f64 {
        self.sum_first / self.n_first as f64
    }
}

impl fmt::Display for LogProbReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "l={}", self.avg())?;
        writeln!(f, "l_change={}", self.avg_change())?;
        writeln!(f, "l_stay={}", self.avg_stay())?;
        writeln!(f, "l_first={}", self.avg_first())?;
        writeln!(f, "n_symbols={}", self.total_symbols())?;
        writeln!(f, "n_change={}", self.n_change)?;
        write!(f, "n_stay={}", self.n_stay)
    }
}

/// Score every sequence with the model and partition the per-symbol
/// log-probabilities into first/stay/change.
pub fn logprob_report<M: TemporalModel>(model: &M, dataset: &[Vec<ClassId>]) -> LogProbReport {
    let mut report = LogProbReport {
        n_first: 0,
        n_stay: 0,
        n_change: 0,
        sum_first: 0.0,
        sum_stay: 0.0,
        sum_change: 0.0,
    };
    for sequence in dataset {
        let logprobs = model.symbol_logprobs(sequence);
        for (k, lp) in logprobs.iter().enumerate() {
            if k == 0 {
                report.n_first += 1;
                report.sum_first += lp;
            } else if sequence[k] == sequence[k - 1] {
                report.n_stay += 1;
                report.sum_stay += lp;
            } else {
                report.n_change += 1;
                report.sum_change += lp;
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Weighted Chord Symbol Recall
// ---------------------------------------------------------------------------

/// A labeled time span in class-id space: `[start_s, end_s)`.
pub type ClassSpan = (f64, f64, ClassId);

#[derive(Debug, Clone, PartialEq)]
pub struct WcsrReport {
    /// Seconds where prediction and annotation agree (t_c).
    pub correct_s: f64,
    /// Total annotated seconds (t_a).
    pub annotated_s: f64,
}

impl WcsrReport {
    /// R = t_c / t_a.
    pub fn recall(&self) -> f64 {
        self.correct_s / self.annotated_s
    }

    pub fn merged(mut self, other: &WcsrReport) -> WcsrReport {
        self.correct_s += other.correct_s;
        self.annotated_s += other.annotated_s;
        self
    }
}

fn overlap_seconds(reference: &[ClassSpan], predicted: &[ClassSpan]) -> f64 {
    let mut correct = 0.0;
    let mut i = 0;
    let mut j = 0;
    while i < reference.len() && j < predicted.len() {
        let (r_start, r_end, r_label) = reference[i];
        let (p_start, p_end, p_label) = predicted[j];
        let lo = r_start.max(p_start);
        let hi = r_end.min(p_end);
        if hi > lo && r_label == p_label {
            correct += hi - lo;
        }
        if r_end <= p_end {
            i += 1;
        } else {
            j += 1;
        }
    }
    correct
}

/// WCSR over matching song sets: `sum_songs t_c / sum_songs t_a`. Spans per
/// song must be sorted and non-overlapping; songs are matched by id and
/// both sides must cover the same ids.
pub fn wcsr(
    reference: &[(u32, Vec<ClassSpan>)],
    predicted: &[(u32, Vec<ClassSpan>)],
) -> Result<WcsrReport> {
    let ref_map: BTreeMap<u32, &Vec<ClassSpan>> =
        reference.iter().map(|(id, s)| (*id, s)).collect();
    let pred_map: BTreeMap<u32, &Vec<ClassSpan>> =
        predicted.iter().map(|(id, s)| (*id, s)).collect();
    if ref_map.len() != reference.len() || pred_map.len() != predicted.len() {
        return Err(Error::contract("duplicate song id in an evaluation set"));
    }
    if ref_map.keys().ne(pred_map.keys()) {
        let missing: Vec<u32> = ref_map
            .keys()
            .filter(|id| !pred_map.contains_key(id))
            .chain(pred_map.keys().filter(|id| !ref_map.contains_key(id)))
            .copied()
            .collect();
        return Err(Error::contract(format!(
            "reference and prediction cover different songs: {missing:?}"
        )));
    }

    let mut report = WcsrReport {
        correct_s: 0.0,
        annotated_s: 0.0,
    };
    for (id, ref_spans) in &ref_map {
        let pred_spans = pred_map[id];
        report.correct_s += overlap_seconds(ref_spans, pred_spans);
        report.annotated_s += ref_spans.iter().map(|(s, e, _)| e - s).sum::<f64>();
    }
    if report.annotated_s <= 0.0 {
        return Err(Error::contract("reference annotations cover zero seconds"));
    }
    Ok(report)
}
