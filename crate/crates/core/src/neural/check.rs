//! Central finite-difference gradient checking.
//!
//! The checker only ever calls the loss closure (forward passes), so it is
//! independent of any backward-pass code it verifies.

use rayon::prelude::*;

use super::matrix::Matrix;

/// Anything exposing its parameter tensors in a fixed order.
pub trait HasTensors {
    fn tensor_names(&self) -> Vec<String>;
    fn tensors(&self) -> Vec<&Matrix>;
    fn tensors_mut(&mut self) -> Vec<&mut Matrix>;
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_tensor: String,
    pub worst_index: usize,
    pub checked: usize,
}

/// Compare `analytic` gradients (one matrix per tensor, in `tensor_names`
/// order) against central finite differences of `loss` with step `h`,
/// touching every single parameter.
///
/// The relative error uses `max(|analytic|, |numeric|, 1e-4)` as the
/// denominator; the floor keeps finite-difference noise from dominating
/// when both gradients are essentially zero.
pub fn finite_difference_check<M, L>(
    model: &M,
    analytic: &[Matrix],
    loss: L,
    h: f64,
) -> GradCheckReport
where
    M: HasTensors + Clone + Sync,
    L: Fn(&M) -> f64 + Sync,
{
    let names = model.tensor_names();
    assert_eq!(names.len(), analytic.len(), "one gradient matrix per tensor");

    // (tensor, element) coordinates, chunked so each worker clones the model
    // once per chunk instead of once per parameter.
    let mut coords = Vec::new();
    for (ti, g) in analytic.iter().enumerate() {
        for e in 0..g.len() {
            coords.push((ti, e));
        }
    }

    let chunk_results: Vec<(f64, usize, usize)> = coords
        .par_chunks(512)
        .map(|chunk| {
            let mut probe = model.clone();
            let mut worst = (0.0f64, 0usize, 0usize);
            for &(ti, e) in chunk {
                let base = probe.tensors()[ti].data()[e];
                probe.tensors_mut()[ti].data_mut()[e] = base + h;
                let up = loss(&probe);
                probe.tensors_mut()[ti].data_mut()[e] = base - h;
                let down = loss(&probe);
                probe.tensors_mut()[ti].data_mut()[e] = base;

                let numeric = (up - down) / (2.0 * h);
                let a = analytic[ti].data()[e];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
                if rel > worst.0 {
                    worst = (rel, ti, e);
                }
            }
            worst
        })
        .collect();

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_tensor: String::new(),
        worst_index: 0,
        checked: coords.len(),
    };
    for (rel, ti, e) in chunk_results {
        if rel >= report.max_rel_err {
            report.max_rel_err = rel;
            report.worst_tensor = names[ti].clone();
            report.worst_index = e;
        }
    }
    report
}
