//! Minimal dense/LSTM compute kernel with exact backpropagation and an
//! SGD-with-momentum trainer.
//!
//! Everything is 64-bit floating point and single-threaded per model; at
//! desk scale this keeps gradient checks reliable and runs deterministic.

mod check;
mod dense;
mod loss;
mod lstm;
mod matrix;
mod optimizer;
mod store;

pub use check::{finite_difference_check, GradCheckReport, HasTensors};
pub use dense::{Activation, Dense, DenseCache};
pub use loss::{cross_entropy, log_softmax, softmax, softmax_ce_grad};
pub use lstm::{LstmCache, LstmLayer, LstmState};
pub use matrix::Matrix;
pub use optimizer::SgdMomentum;
pub use store::{load_tensors, save_tensors, TensorFile};
