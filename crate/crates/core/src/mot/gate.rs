use crate::error::{Error, Result};
use crate::numerics::{softmax, Matrix, SeededRng};

use super::TokenSequence;

/// Two-layer tanh MLP over the mean-pooled token sequence, followed by softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct GatingNetwork {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
}

/// Intermediate values of one gate evaluation (kept for backpropagation).
#[derive(Debug, Clone)]
pub struct GateTrace {
    pub pooled: Matrix,
    pub hidden: Matrix,
    pub logits: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GatingNetwork {
    pub fn new(w1: Matrix, b1: Matrix, w2: Matrix, b2: Matrix) -> Result<Self> {
        let hidden = w1.cols();
        if b1.shape() != (1, hidden) || w2.rows() != hidden || b2.shape() != (1, w2.cols()) {
            return Err(Error::dim(format!(
                "gate shapes w1 {:?} b1 {:?} w2 {:?} b2 {:?}",
                w1.shape(),
                b1.shape(),
                w2.shape(),
                b2.shape()
            )));
        }
        Ok(Self { w1, b1, w2, b2 })
    }

    pub fn zeros(d_model: usize, d_hidden: usize, n_experts: usize) -> Self {
        Self {
            w1: Matrix::zeros(d_model, d_hidden),
            b1: Matrix::zeros(1, d_hidden),
            w2: Matrix::zeros(d_hidden, n_experts),
            b2: Matrix::zeros(1, n_experts),
        }
    }

    /// Random first layer and zero output layer, so the initial routing is uniform.
    pub fn init(d_model: usize, d_hidden: usize, n_experts: usize, rng: &mut SeededRng) -> Self {
        let mut g = Self::zeros(d_model, d_hidden, n_experts);
        g.w1 = Matrix::gaussian(d_model, d_hidden, 1.0 / (d_model as f64).sqrt(), rng);
        g
    }

    /// Both layers random.
    pub fn random(d_model: usize, d_hidden: usize, n_experts: usize, rng: &mut SeededRng) -> Self {
        let mut g = Self::init(d_model, d_hidden, n_experts, rng);
        g.w2 = Matrix::gaussian(d_hidden, n_experts, 1.0 / (d_hidden as f64).sqrt(), rng);
        g.b2 = Matrix::gaussian(1, n_experts, 0.1, rng);
        g
    }

    pub fn d_model(&self) -> usize {
        self.w1.rows()
    }

    pub fn n_experts(&self) -> usize {
        self.w2.cols()
    }

    /// Routing weights over the experts for the whole sequence.
    pub fn forward(&self, x: &TokenSequence) -> Result<Vec<f64>> {
        Ok(self.trace(x)?.weights)
    }

    pub fn trace(&self, x: &TokenSequence) -> Result<GateTrace> {
        if x.is_empty() {
            return Err(Error::EmptyInput("gating an empty token sequence"));
        }
        if x.d_model() != self.d_model() {
            return Err(Error::dim(format!(
                "gate expects d_model {}, got {}",
                self.d_model(),
                x.d_model()
            )));
        }
        let pooled = x.tokens().mean_rows()?;
        let mut hidden = pooled.matmul(&self.w1)?;
        hidden.add_scaled(1.0, &self.b1)?;
        let hidden = hidden.map(f64::tanh);
        let mut logits = hidden.matmul(&self.w2)?;
        logits.add_scaled(1.0, &self.b2)?;
        let logits = logits.into_data();
        let weights = softmax(&logits)?;
        Ok(GateTrace {
            pooled,
            hidden,
            logits,
            weights,
        })
    }
}
