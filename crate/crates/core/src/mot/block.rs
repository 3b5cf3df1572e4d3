use crate::error::{Error, Result};
use crate::numerics::{softmax, Matrix, SeededRng};

use super::{
    agr_select, AgrFallback, GatingNetwork, LoraExpert, MoTLinear, MotConfig, RoutingDecision,
    TokenSequence, BACKBONE_EXPERT,
};

/// Variance floor of the parameter-free layer norm.
pub const LN_EPS: f64 = 1e-5;

/// The six expert-carrying linears of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearSlot {
    Query,
    Key,
    Value,
    Output,
    Ffn1,
    Ffn2,
}

impl LinearSlot {
    pub const ALL: [LinearSlot; 6] = [
        LinearSlot::Query,
        LinearSlot::Key,
        LinearSlot::Value,
        LinearSlot::Output,
        LinearSlot::Ffn1,
        LinearSlot::Ffn2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinearSlot::Query => "wq",
            LinearSlot::Key => "wk",
            LinearSlot::Value => "wv",
            LinearSlot::Output => "wo",
            LinearSlot::Ffn1 => "ffn1",
            LinearSlot::Ffn2 => "ffn2",
        }
    }
}

/// Hook into a block forward pass.
pub trait ForwardObserver {
    fn gate_evaluated(&mut self, _weights: &[f64]) {}
    fn linear_applied(&mut self, _slot: LinearSlot, _routing: &RoutingDecision) {}
}

pub struct NoopObserver;

impl ForwardObserver for NoopObserver {}

/// Every intermediate of a forward pass.
#[derive(Debug, Clone)]
pub struct BlockCache {
    pub x: Matrix,
    pub ln1: Matrix,
    pub ln1_inv_std: Vec<f64>,
    pub q: Matrix,
    pub k: Matrix,
    pub v: Matrix,
    /// One `n x n` row-stochastic matrix per head.
    pub probs: Vec<Matrix>,
    pub ctx: Matrix,
    pub attn: Matrix,
    pub h1: Matrix,
    pub ln2: Matrix,
    pub ln2_inv_std: Vec<f64>,
    pub f: Matrix,
    pub g: Matrix,
    pub ffn: Matrix,
    pub out: Matrix,
}

#[derive(Debug, Clone)]
pub struct BlockOutput {
    pub tokens: TokenSequence,
    pub routing: RoutingDecision,
}

/// Pre-norm transformer block whose attention and FFN linears are all
/// [`MoTLinear`]s driven by a single routing decision.
///
/// ```text
/// h   = x + Wo · MHA(Wq·LN(x), Wk·LN(x), Wv·LN(x))
/// out = h + W2 · tanh(W1 · LN(h))
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct MoTBlock {
    pub wq: MoTLinear,
    pub wk: MoTLinear,
    pub wv: MoTLinear,
    pub wo: MoTLinear,
    pub ffn1: MoTLinear,
    pub ffn2: MoTLinear,
    pub gate: GatingNetwork,
    n_heads: usize,
    fallback: AgrFallback,
}

impl MoTBlock {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        wq: MoTLinear,
        wk: MoTLinear,
        wv: MoTLinear,
        wo: MoTLinear,
        ffn1: MoTLinear,
        ffn2: MoTLinear,
        gate: GatingNetwork,
        n_heads: usize,
        fallback: AgrFallback,
    ) -> Result<Self> {
        let block = Self {
            wq,
            wk,
            wv,
            wo,
            ffn1,
            ffn2,
            gate,
            n_heads,
            fallback,
        };
        block.validate()?;
        Ok(block)
    }

    /// Training initialization: random frozen backbones, zero `B` factors and
    /// a gate with a zero output layer (uniform routing).
    pub fn init(cfg: &MotConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = SeededRng::new(cfg.seed);
        let (d, ff, r, n) = (cfg.d_model, cfg.ffn_hidden(), cfg.lora_rank, cfg.n_experts);
        let mut lin = |d_out, d_in| MoTLinear::init(d_out, d_in, r, n, &mut rng);
        let (wq, wk, wv, wo) = (lin(d, d), lin(d, d), lin(d, d), lin(d, d));
        let (ffn1, ffn2) = (lin(ff, d), lin(d, ff));
        let gate = GatingNetwork::init(d, cfg.gate_hidden, n, &mut rng);
        Self::new(
            wq,
            wk,
            wv,
            wo,
            ffn1,
            ffn2,
            gate,
            cfg.n_heads,
            cfg.agr_fallback,
        )
    }

    /// Every parameter random, including `B` factors and the gate output layer.
    pub fn random(cfg: &MotConfig, lora_std: f64) -> Result<Self> {
        let mut block = Self::init(cfg)?;
        let mut rng = SeededRng::new(cfg.seed ^ 0x005E_ED0F_B10C);
        for slot in LinearSlot::ALL {
            for e in &mut block.linear_mut(slot).experts {
                *e = LoraExpert::new(
                    Matrix::gaussian(e.a.rows(), e.a.cols(), lora_std, &mut rng),
                    Matrix::gaussian(e.b.rows(), e.b.cols(), lora_std, &mut rng),
                )?;
            }
        }
        block.gate = GatingNetwork::random(cfg.d_model, cfg.gate_hidden, cfg.n_experts, &mut rng);
        Ok(block)
    }

    fn validate(&self) -> Result<()> {
        let d = self.d_model();
        if self.n_heads == 0 || !d.is_multiple_of(self.n_heads) {
            return Err(Error::dim(format!(
                "d_model {d} is not divisible by {} heads",
                self.n_heads
            )));
        }
        let ff = self.ffn1.d_out();
        let expected = [(d, d), (d, d), (d, d), (d, d), (ff, d), (d, ff)];
        let n = self.gate.n_experts();
        let rank = self.wq.experts.first().map(LoraExpert::rank);
        for (slot, shape) in LinearSlot::ALL.into_iter().zip(expected) {
            let l = self.linear(slot);
            if l.w0.shape() != shape {
                return Err(Error::dim(format!(
                    "{} is {:?}, expected {shape:?}",
                    slot.name(),
                    l.w0.shape()
                )));
            }
            if l.n_experts() != n || l.experts.first().map(LoraExpert::rank) != rank {
                return Err(Error::dim(format!(
                    "{} expert count or rank differs from the rest of the block",
                    slot.name()
                )));
            }
        }
        if self.gate.d_model() != d {
            return Err(Error::dim("gate input width differs from d_model"));
        }
        if n < 2 {
            return Err(Error::Config("a block needs at least two experts".into()));
        }
        Ok(())
    }

    pub fn d_model(&self) -> usize {
        self.wq.d_in()
    }

    pub fn n_heads(&self) -> usize {
        self.n_heads
    }

    pub fn n_experts(&self) -> usize {
        self.gate.n_experts()
    }

    pub fn lora_rank(&self) -> usize {
        self.wq.experts[0].rank()
    }

    pub fn fallback(&self) -> AgrFallback {
        self.fallback
    }

    pub fn linear(&self, slot: LinearSlot) -> &MoTLinear {
        match slot {
            LinearSlot::Query => &self.wq,
            LinearSlot::Key => &self.wk,
            LinearSlot::Value => &self.wv,
            LinearSlot::Output => &self.wo,
            LinearSlot::Ffn1 => &self.ffn1,
            LinearSlot::Ffn2 => &self.ffn2,
        }
    }

    pub fn linear_mut(&mut self, slot: LinearSlot) -> &mut MoTLinear {
        match slot {
            LinearSlot::Query => &mut self.wq,
            LinearSlot::Key => &mut self.wk,
            LinearSlot::Value => &mut self.wv,
            LinearSlot::Output => &mut self.wo,
            LinearSlot::Ffn1 => &mut self.ffn1,
            LinearSlot::Ffn2 => &mut self.ffn2,
        }
    }

    /// Gate once, select experts, run the block.
    pub fn route(&self, x: &TokenSequence) -> Result<RoutingDecision> {
        let weights = self.gate.forward(x)?;
        agr_select(&weights, BACKBONE_EXPERT, self.fallback)
    }

    pub fn forward(&self, x: &TokenSequence) -> Result<BlockOutput> {
        self.forward_observed(x, &mut NoopObserver)
    }

    pub fn forward_observed(
        &self,
        x: &TokenSequence,
        observer: &mut dyn ForwardObserver,
    ) -> Result<BlockOutput> {
        let weights = self.gate.forward(x)?;
        observer.gate_evaluated(&weights);
        let routing = agr_select(&weights, BACKBONE_EXPERT, self.fallback)?;
        let cache = self.forward_with_routing(x, &routing, observer)?;
        Ok(BlockOutput {
            tokens: x.with_tokens(cache.out),
            routing,
        })
    }

    /// Runs the block under a fixed routing decision, keeping every intermediate.
    pub fn forward_with_routing(
        &self,
        x: &TokenSequence,
        routing: &RoutingDecision,
        observer: &mut dyn ForwardObserver,
    ) -> Result<BlockCache> {
        self.run(x.tokens(), |slot, input| {
            observer.linear_applied(slot, routing);
            self.linear(slot).forward(input, routing)
        })
    }

    /// The same block with every expert removed: each linear is just `W0`.
    pub fn forward_backbone_only(&self, x: &TokenSequence) -> Result<Matrix> {
        let cache = self.run(x.tokens(), |slot, input| {
            input.matmul_t(&self.linear(slot).w0)
        })?;
        Ok(cache.out)
    }

    fn run(
        &self,
        x: &Matrix,
        mut project: impl FnMut(LinearSlot, &Matrix) -> Result<Matrix>,
    ) -> Result<BlockCache> {
        if x.cols() != self.d_model() {
            return Err(Error::dim(format!(
                "block expects d_model {}, got {}",
                self.d_model(),
                x.cols()
            )));
        }
        if x.rows() == 0 {
            return Err(Error::EmptyInput("block forward on an empty sequence"));
        }
        let (ln1, ln1_inv_std) = layer_norm(x);
        let q = project(LinearSlot::Query, &ln1)?;
        let k = project(LinearSlot::Key, &ln1)?;
        let v = project(LinearSlot::Value, &ln1)?;
        let (ctx, probs) = attention(&q, &k, &v, self.n_heads)?;
        let attn = project(LinearSlot::Output, &ctx)?;
        let h1 = x.add(&attn)?;
        let (ln2, ln2_inv_std) = layer_norm(&h1);
        let f = project(LinearSlot::Ffn1, &ln2)?;
        let g = f.map(f64::tanh);
        let ffn = project(LinearSlot::Ffn2, &g)?;
        let out = h1.add(&ffn)?;
        Ok(BlockCache {
            x: x.clone(),
            ln1,
            ln1_inv_std,
            q,
            k,
            v,
            probs,
            ctx,
            attn,
            h1,
            ln2,
            ln2_inv_std,
            f,
            g,
            ffn,
            out,
        })
    }
}

/// Per-row normalization to zero mean and unit variance (no affine terms).
/// Returns the normalized rows and each row's `1 / sqrt(var + eps)`.
pub fn layer_norm(x: &Matrix) -> (Matrix, Vec<f64>) {
    let mut out = x.clone();
    let mut inv_stds = Vec::with_capacity(x.rows());
    let d = x.cols() as f64;
    for r in 0..x.rows() {
        let row = out.row_mut(r);
        let mean = row.iter().sum::<f64>() / d;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
        let inv_std = 1.0 / (var + LN_EPS).sqrt();
        for v in row.iter_mut() {
            *v = (*v - mean) * inv_std;
        }
        inv_stds.push(inv_std);
    }
    (out, inv_stds)
}

/// Multi-head scaled dot-product attention without masking.
/// Returns the concatenated head outputs and each head's probability matrix.
pub fn attention(
    q: &Matrix,
    k: &Matrix,
    v: &Matrix,
    n_heads: usize,
) -> Result<(Matrix, Vec<Matrix>)> {
    if q.shape() != k.shape() || q.shape() != v.shape() {
        return Err(Error::dim("q, k and v must share a shape"));
    }
    let (n, d) = q.shape();
    if n_heads == 0 || d % n_heads != 0 {
        return Err(Error::dim(format!("{d} features over {n_heads} heads")));
    }
    let dh = d / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut ctx = Matrix::zeros(n, d);
    let mut probs = Vec::with_capacity(n_heads);
    for h in 0..n_heads {
        let qh = q.columns(h * dh, dh);
        let kh = k.columns(h * dh, dh);
        let vh = v.columns(h * dh, dh);
        let scores = qh.matmul_t(&kh)?.scale(scale);
        let mut p = Matrix::zeros(n, n);
        for r in 0..n {
            p.row_mut(r).copy_from_slice(&softmax(scores.row(r))?);
        }
        ctx.set_columns(h * dh, &p.matmul(&vh)?);
        probs.push(p);
    }
    Ok((ctx, probs))
}
