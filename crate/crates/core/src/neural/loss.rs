//! Softmax and categorical cross-entropy.

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// Numerically stable log-softmax: `z - max - ln(sum(exp(z - max)))`.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - max - log_sum).collect()
}

/// Cross-entropy of a softmax distribution against a one-hot target.
pub fn cross_entropy(probs: &[f64], target: usize) -> f64 {
    -probs[target].ln()
}

/// Gradient of softmax + cross-entropy with respect to the logits:
/// `p - onehot(target)`, scaled by `weight`.
pub fn softmax_ce_grad(probs: &[f64], target: usize, weight: f64) -> Vec<f64> {
    let mut grad: Vec<f64> = probs.iter().map(|&p| p * weight).collect();
    grad[target] -= weight;
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_normalizes_and_orders() {
        let p = softmax(&[1.0, 2.0, 3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] < p[1] && p[1] < p[2]);
    }

    #[test]
    fn softmax_survives_large_logits() {
        let p = softmax(&[1000.0, 1000.0]);
        assert!((p[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_softmax_matches_softmax_log() {
        let z = [0.3, -1.2, 4.0, 0.0];
        let lp = log_softmax(&z);
        let p = softmax(&z);
        for (a, b) in lp.iter().zip(p.iter()) {
            assert!((a - b.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn grad_vanishes_when_prediction_is_certain_and_correct() {
        let probs = vec![0.0, 1.0, 0.0];
        let grad = softmax_ce_grad(&probs, 1, 1.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn grad_scales_linearly_with_loss_weight() {
        let probs = softmax(&[0.1, 0.7, -0.4]);
        let g1 = softmax_ce_grad(&probs, 2, 1.0);
        let g2 = softmax_ce_grad(&probs, 2, 2.0);
        for (a, b) in g1.iter().zip(g2.iter()) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
    }
}
