//! Fully connected layer with an optional rectifier.

use rand::Rng;

use super::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
}

/// `y = act(W x + b)` with gradient buffers alongside the parameters.
#[derive(Debug, Clone)]
pub struct Dense {
    pub w: Matrix,
    pub b: Matrix,
    pub dw: Matrix,
    pub db: Matrix,
    pub activation: Activation,
}

/// Per-call activation record needed by [`Dense::backward`].
#[derive(Debug, Clone)]
pub struct DenseCache {
    input: Vec<f64>,
    /// Pre-activation output; only kept when the activation needs it.
    pre: Option<Vec<f64>>,
}

impl Dense {
    pub fn new<R: Rng>(input: usize, output: usize, activation: Activation, rng: &mut R) -> Self {
        Dense {
            w: Matrix::glorot(output, input, rng),
            b: Matrix::zeros(output, 1),
            dw: Matrix::zeros(output, input),
            db: Matrix::zeros(output, 1),
            activation,
        }
    }

    pub fn zeroed(input: usize, output: usize, activation: Activation) -> Self {
        Dense {
            w: Matrix::zeros(output, input),
            b: Matrix::zeros(output, 1),
            dw: Matrix::zeros(output, input),
            db: Matrix::zeros(output, 1),
            activation,
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.cols()
    }

    pub fn output_size(&self) -> usize {
        self.w.rows()
    }

    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, DenseCache) {
        let mut out = self.b.data().to_vec();
        self.w.matvec_acc(x, &mut out);
        let pre = match self.activation {
            Activation::Linear => None,
            Activation::Relu => {
                let pre = out.clone();
                for v in &mut out {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                Some(pre)
            }
        };
        (
            out,
            DenseCache {
                input: x.to_vec(),
                pre,
            },
        )
    }

    /// Output without keeping a cache, for inference paths.
    pub fn infer(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.b.data().to_vec();
        self.w.matvec_acc(x, &mut out);
        if self.activation == Activation::Relu {
            for v in &mut out {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        out
    }

    /// Accumulate parameter gradients for one call and return the gradient
    /// with respect to the input.
    pub fn backward(&mut self, cache: &DenseCache, dout: &[f64]) -> Vec<f64> {
        let mut dpre = dout.to_vec();
        if let Some(pre) = &cache.pre {
            for (d, &p) in dpre.iter_mut().zip(pre.iter()) {
                if p <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        self.dw.add_outer(&dpre, &cache.input);
        for (db, &d) in self.db.data_mut().iter_mut().zip(dpre.iter()) {
            *db += d;
        }
        let mut dx = vec![0.0; cache.input.len()];
        self.w.tvec_acc(&dpre, &mut dx);
        dx
    }

    pub fn zero_grads(&mut self) {
        self.dw.fill(0.0);
        self.db.fill(0.0);
    }

    pub fn params_and_grads(&mut self) -> Vec<(&mut Matrix, &mut Matrix)> {
        vec![(&mut self.w, &mut self.dw), (&mut self.b, &mut self.db)]
    }

    pub fn named_tensors(&self) -> Vec<(String, &Matrix)> {
        vec![("w".to_string(), &self.w), ("b".to_string(), &self.b)]
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        vec![("w".to_string(), &mut self.w), ("b".to_string(), &mut self.b)]
    }
}
