//! Stochastic gradient descent with classical momentum and a linear
//! learning-rate ramp from `lr0` down to zero over `max_epochs`.

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SgdMomentum {
    pub momentum: f64,
    pub lr0: f64,
    pub max_epochs: usize,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
    velocities: Vec<Matrix>,
}

impl SgdMomentum {
    pub fn new(momentum: f64, lr0: f64, max_epochs: usize) -> Self {
        SgdMomentum {
            momentum,
            lr0,
            max_epochs,
            clip_norm: Some(5.0),
            velocities: Vec::new(),
        }
    }

    /// `lr0 * (1 - epoch / max_epochs)`, clamped at zero.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        let frac = 1.0 - epoch as f64 / self.max_epochs as f64;
        self.lr0 * frac.max(0.0)
    }

    /// Apply one update `v <- momentum*v - lr(epoch)*g; p <- p + v` to every
    /// (parameter, gradient) pair. Pairs must arrive in a fixed order across
    /// calls since velocities are matched by position.
    pub fn step(&mut self, mut pairs: Vec<(&mut Matrix, &mut Matrix)>, epoch: usize) -> Result<()> {
        if self.velocities.is_empty() {
            self.velocities = pairs
                .iter()
                .map(|(_, g)| Matrix::zeros(g.rows(), g.cols()))
                .collect();
        }
        if self.velocities.len() != pairs.len() {
            return Err(Error::contract(format!(
                "optimizer was initialized with {} tensors, got {}",
                self.velocities.len(),
                pairs.len()
            )));
        }

        let mut sq_norm = 0.0;
        for (_, g) in &pairs {
            if !g.all_finite() {
                return Err(Error::contract("non-finite gradient"));
            }
            sq_norm += g.sq_norm();
        }
        if let Some(clip) = self.clip_norm {
            let norm = sq_norm.sqrt();
            if norm > clip {
                let s = clip / norm;
                for (_, g) in pairs.iter_mut() {
                    g.scale(s);
                }
            }
        }

        let lr = self.learning_rate(epoch);
        for (idx, (p, g)) in pairs.iter_mut().enumerate() {
            let v = &mut self.velocities[idx];
            v.scale(self.momentum);
            v.add_scaled(g, -lr);
            p.add_scaled(v, 1.0);
        }
        Ok(())
    }

    /// Drop accumulated velocities (e.g. when restarting training).
    pub fn reset(&mut self) {
        self.velocities.clear();
    }
}
