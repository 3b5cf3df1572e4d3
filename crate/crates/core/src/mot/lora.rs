use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

use super::RoutingDecision;

/// Standard deviation of the Gaussian used for the `A` factor at init.
pub const LORA_INIT_STD: f64 = 0.02;

/// Low-rank weight delta `a * b` with `a: d_out x r` and `b: r x d_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoraExpert {
    pub a: Matrix,
    pub b: Matrix,
}

impl LoraExpert {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if a.cols() != b.rows() {
            return Err(Error::dim(format!(
                "lora factors {:?} and {:?} disagree on rank",
                a.shape(),
                b.shape()
            )));
        }
        Ok(Self { a, b })
    }

    /// Gaussian `a`, zero `b`: the delta starts at exactly zero.
    pub fn init(d_out: usize, d_in: usize, rank: usize, rng: &mut SeededRng) -> Self {
        Self {
            a: Matrix::gaussian(d_out, rank, LORA_INIT_STD, rng),
            b: Matrix::zeros(rank, d_in),
        }
    }

    pub fn rank(&self) -> usize {
        self.a.cols()
    }

    pub fn d_out(&self) -> usize {
        self.a.rows()
    }

    pub fn d_in(&self) -> usize {
        self.b.cols()
    }

    pub fn delta(&self) -> Result<Matrix> {
        self.a.matmul(&self.b)
    }
}

/// Frozen backbone weight plus one LoRA delta per expert.
#[derive(Debug, Clone, PartialEq)]
pub struct MoTLinear {
    pub w0: Matrix,
    pub experts: Vec<LoraExpert>,
}

impl MoTLinear {
    pub fn new(w0: Matrix, experts: Vec<LoraExpert>) -> Result<Self> {
        let rank = experts.first().map(LoraExpert::rank);
        for e in &experts {
            if e.a.rows() != w0.rows() || e.b.cols() != w0.cols() || Some(e.rank()) != rank {
                return Err(Error::dim(format!(
                    "expert {:?}x{:?} does not fit backbone {:?}",
                    e.a.shape(),
                    e.b.shape(),
                    w0.shape()
                )));
            }
        }
        Ok(Self { w0, experts })
    }

    /// Backbone ~ N(0, 1/d_in), experts per [`LoraExpert::init`].
    pub fn init(
        d_out: usize,
        d_in: usize,
        rank: usize,
        n_experts: usize,
        rng: &mut SeededRng,
    ) -> Self {
        let w0 = Matrix::gaussian(d_out, d_in, 1.0 / (d_in as f64).sqrt(), rng);
        let experts = (0..n_experts)
            .map(|_| LoraExpert::init(d_out, d_in, rank, rng))
            .collect();
        Self { w0, experts }
    }

    pub fn d_in(&self) -> usize {
        self.w0.cols()
    }

    pub fn d_out(&self) -> usize {
        self.w0.rows()
    }

    pub fn n_experts(&self) -> usize {
        self.experts.len()
    }

    /// `x * (W0 + sum_{i in S} w_i A_i B_i)^T`, evaluated through the factors as
    /// `x W0^T + sum w_i (x B_i^T) A_i^T`.
    pub fn forward(&self, x: &Matrix, routing: &RoutingDecision) -> Result<Matrix> {
        self.check(x, routing)?;
        let mut y = x.matmul_t(&self.w0)?;
        for &i in routing.active_set() {
            let expert = &self.experts[i];
            let low = x.matmul_t(&expert.b)?;
            let up = low.matmul_t(&expert.a)?;
            y.add_scaled(routing.weights()[i], &up)?;
        }
        Ok(y)
    }

    /// The merged dense weight `W0 + sum_{i in S} w_i A_i B_i`.
    pub fn merged(&self, routing: &RoutingDecision) -> Result<Matrix> {
        if routing.n_experts() != self.n_experts() {
            return Err(Error::dim("routing/expert count mismatch"));
        }
        let mut w = self.w0.clone();
        for &i in routing.active_set() {
            w.add_scaled(routing.weights()[i], &self.experts[i].delta()?)?;
        }
        Ok(w)
    }

    /// Same map as [`forward`](Self::forward) through the merged dense weight.
    pub fn forward_dense(&self, x: &Matrix, routing: &RoutingDecision) -> Result<Matrix> {
        self.check(x, routing)?;
        x.matmul_t(&self.merged(routing)?)
    }

    fn check(&self, x: &Matrix, routing: &RoutingDecision) -> Result<()> {
        if x.cols() != self.d_in() {
            return Err(Error::dim(format!(
                "input width {} for a layer with d_in {}",
                x.cols(),
                self.d_in()
            )));
        }
        if routing.n_experts() != self.n_experts() {
            return Err(Error::dim(format!(
                "{} routing weights for {} experts",
                routing.n_experts(),
                self.n_experts()
            )));
        }
        Ok(())
    }
}
