//! Common interface for sequence models over the 25 chord classes.

use crate::chord::{ClassId, NUM_CLASSES};

/// A model assigning `P(y_k | y_1..y_{k-1})` over chord classes, driven one
/// symbol at a time. The first step feeds the no-chord symbol as input, so
/// the first distribution plays the role of `P(y_1)`.
///
/// Implementations carry their conditioning context in `State`; stepping is
/// pure, which lets decoders fork hypotheses by cloning states.
pub trait TemporalModel {
    type State: Clone;

    /// Context before anything has been observed.
    fn start_state(&self) -> Self::State;

    /// Natural-log probabilities over the next symbol given the context in
    /// `state`, after feeding it `input` (the previously emitted symbol, or
    /// no-chord at the very first step). Returns the advanced state.
    fn step(&self, state: &Self::State, input: ClassId) -> ([f64; NUM_CLASSES], Self::State);

    /// Log-probability of each symbol given its prefix, by stepping the
    /// model through the sequence.
    fn symbol_logprobs(&self, sequence: &[ClassId]) -> Vec<f64> {
        let mut state = self.start_state();
        let mut input = ClassId::NO_CHORD;
        let mut out = Vec::with_capacity(sequence.len());
        for &y in sequence {
            let (dist, next) = self.step(&state, input);
            out.push(dist[y.index()]);
            state = next;
            input = y;
        }
        out
    }

    /// Total sequence log-probability (sum of [`symbol_logprobs`]).
    ///
    /// [`symbol_logprobs`]: TemporalModel::symbol_logprobs
    fn total_logprob(&self, sequence: &[ClassId]) -> f64 {
        self.symbol_logprobs(sequence).iter().sum()
    }
}

impl<M: TemporalModel> TemporalModel for &M {
    type State = M::State;

    fn start_state(&self) -> Self::State {
        (*self).start_state()
    }

    fn step(&self, state: &Self::State, input: ClassId) -> ([f64; NUM_CLASSES], Self::State) {
        (*self).step(state, input)
    }
}
