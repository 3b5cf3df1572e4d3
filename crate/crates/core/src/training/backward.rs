use crate::error::{Error, Result};
use crate::mot::{
    agr_select, BlockCache, GateTrace, GatingNetwork, LinearSlot, MoTBlock, MoTLinear,
    NoopObserver, RoutingDecision, TokenSequence, BACKBONE_EXPERT,
};
use crate::numerics::Matrix;

use super::{mse, mse_grad};

#[derive(Debug, Clone, PartialEq)]
pub struct GateGrads {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
}

/// Gradients for every trainable parameter of a block. Backbone weights are
/// frozen and carry no gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrads {
    pub gate: GateGrads,
    /// `experts[slot][i] = (dA_i, dB_i)`, slots in [`LinearSlot::ALL`] order.
    pub experts: Vec<Vec<(Matrix, Matrix)>>,
}

impl BlockGrads {
    pub fn zeros_like(block: &MoTBlock) -> Self {
        let g = &block.gate;
        let zero = |m: &Matrix| Matrix::zeros(m.rows(), m.cols());
        Self {
            gate: GateGrads {
                w1: zero(&g.w1),
                b1: zero(&g.b1),
                w2: zero(&g.w2),
                b2: zero(&g.b2),
            },
            experts: LinearSlot::ALL
                .iter()
                .map(|&s| {
                    block
                        .linear(s)
                        .experts
                        .iter()
                        .map(|e| (zero(&e.a), zero(&e.b)))
                        .collect()
                })
                .collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &BlockGrads) -> Result<()> {
        for (a, b) in self.matrices_mut().into_iter().zip(other.matrices()) {
            a.add_scaled(alpha, b)?;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.matrices().iter().all(|m| m.is_finite())
    }

    /// Gate matrices, then every `(dA, dB)` pair in slot/expert order.
    pub fn matrices(&self) -> Vec<&Matrix> {
        let g = &self.gate;
        let mut out = vec![&g.w1, &g.b1, &g.w2, &g.b2];
        for slot in &self.experts {
            for (a, b) in slot {
                out.push(a);
                out.push(b);
            }
        }
        out
    }

    fn matrices_mut(&mut self) -> Vec<&mut Matrix> {
        let g = &mut self.gate;
        let mut out = vec![&mut g.w1, &mut g.b1, &mut g.w2, &mut g.b2];
        for slot in &mut self.experts {
            for (a, b) in slot {
                out.push(a);
                out.push(b);
            }
        }
        out
    }
}

/// Loss and gradients for one `(input, target)` pair.
#[derive(Debug, Clone)]
pub struct SampleGradients {
    pub loss: f64,
    pub grads: BlockGrads,
    pub routing: RoutingDecision,
}

/// Forward and backward pass for one sample. The prediction is the mean of
/// the block's output tokens and the loss is its [`mse`] against `target`.
pub fn sample_gradients(
    block: &MoTBlock,
    input: &TokenSequence,
    target: &Matrix,
) -> Result<SampleGradients> {
    let trace = block.gate.trace(input)?;
    let routing = agr_select(&trace.weights, BACKBONE_EXPERT, block.fallback())?;
    let cache = block.forward_with_routing(input, &routing, &mut NoopObserver)?;
    let pred = cache.out.mean_rows()?;
    let loss = mse(&pred, target)?;
    let dpred = mse_grad(&pred, target)?;
    let grads = backward(block, &trace, &routing, &cache, &dpred)?;
    if !loss.is_finite() || !grads.is_finite() {
        return Err(Error::Numerical("non-finite loss or gradient".into()));
    }
    Ok(SampleGradients {
        loss,
        grads,
        routing,
    })
}

/// Loss of one sample under a fixed active set, with weights recomputed from
/// the current gate. Matches the function [`sample_gradients`] differentiates.
pub(crate) fn loss_with_fixed_selection(
    block: &MoTBlock,
    input: &TokenSequence,
    target: &Matrix,
    selection: &RoutingDecision,
) -> Result<f64> {
    let weights = block.gate.forward(input)?;
    let routing = selection.with_weights(weights);
    let cache = block.forward_with_routing(input, &routing, &mut NoopObserver)?;
    mse(&cache.out.mean_rows()?, target)
}

fn backward(
    block: &MoTBlock,
    trace: &GateTrace,
    routing: &RoutingDecision,
    cache: &BlockCache,
    dpred: &Matrix,
) -> Result<BlockGrads> {
    let mut grads = BlockGrads::zeros_like(block);
    let mut dweights = vec![0.0; block.n_experts()];
    let n = cache.out.rows();

    // out = h1 + ffn; pred = mean of out rows.
    let mut dout = Matrix::zeros(n, cache.out.cols());
    for r in 0..n {
        for (d, &g) in dout.row_mut(r).iter_mut().zip(dpred.data()) {
            *d = g / n as f64;
        }
    }
    let mut lin = |slot: LinearSlot, x_in: &Matrix, dy: &Matrix| {
        let idx = LinearSlot::ALL
            .iter()
            .position(|&s| s == slot)
            .expect("known slot");
        linear_backward(
            block.linear(slot),
            x_in,
            routing,
            dy,
            &mut grads.experts[idx],
            &mut dweights,
        )
    };

    let dg = lin(LinearSlot::Ffn2, &cache.g, &dout)?;
    let df = dg.hadamard(&cache.g.map(|t| 1.0 - t * t))?;
    let dln2 = lin(LinearSlot::Ffn1, &cache.ln2, &df)?;
    let mut dh1 = dout;
    dh1.add_scaled(
        1.0,
        &layer_norm_backward(&cache.ln2, &cache.ln2_inv_std, &dln2),
    )?;

    // h1 = x + attn; the input itself is not trained.
    let dctx = lin(LinearSlot::Output, &cache.ctx, &dh1)?;
    let (dq, dk, dv) = attention_backward(cache, block.n_heads(), &dctx)?;
    let mut dln1 = lin(LinearSlot::Query, &cache.ln1, &dq)?;
    dln1.add_scaled(1.0, &lin(LinearSlot::Key, &cache.ln1, &dk)?)?;
    dln1.add_scaled(1.0, &lin(LinearSlot::Value, &cache.ln1, &dv)?)?;

    grads.gate = gate_backward(&block.gate, trace, &dweights)?;
    Ok(grads)
}

/// Backpropagates through `y = x W0^T + sum_{i in S} w_i (x B_i^T) A_i^T`.
/// Accumulates `dA_i`, `dB_i` and `dL/dw_i`; returns `dL/dx`.
fn linear_backward(
    layer: &MoTLinear,
    x: &Matrix,
    routing: &RoutingDecision,
    dy: &Matrix,
    expert_grads: &mut [(Matrix, Matrix)],
    dweights: &mut [f64],
) -> Result<Matrix> {
    let mut dx = dy.matmul(&layer.w0)?;
    for &i in routing.active_set() {
        let w = routing.weights()[i];
        let e = &layer.experts[i];
        let xb = x.matmul_t(&e.b)?;
        let dya = dy.matmul(&e.a)?;
        expert_grads[i].0.add_scaled(w, &dy.t_matmul(&xb)?)?;
        expert_grads[i].1.add_scaled(w, &dya.t_matmul(x)?)?;
        dx.add_scaled(w, &dya.matmul(&e.b)?)?;
        dweights[i] += dya.hadamard(&xb)?.sum();
    }
    Ok(dx)
}

fn layer_norm_backward(y: &Matrix, inv_std: &[f64], dy: &Matrix) -> Matrix {
    let d = y.cols() as f64;
    let mut dx = Matrix::zeros(y.rows(), y.cols());
    for (r, &s) in inv_std.iter().enumerate() {
        let (yr, gr) = (y.row(r), dy.row(r));
        let mean_g = gr.iter().sum::<f64>() / d;
        let mean_gy = gr.iter().zip(yr).map(|(g, v)| g * v).sum::<f64>() / d;
        for ((o, &g), &v) in dx.row_mut(r).iter_mut().zip(gr).zip(yr) {
            *o = s * (g - mean_g - v * mean_gy);
        }
    }
    dx
}

fn attention_backward(
    cache: &BlockCache,
    n_heads: usize,
    dctx: &Matrix,
) -> Result<(Matrix, Matrix, Matrix)> {
    let (n, d) = cache.q.shape();
    let dh = d / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut dq = Matrix::zeros(n, d);
    let mut dk = Matrix::zeros(n, d);
    let mut dv = Matrix::zeros(n, d);
    for (h, p) in cache.probs.iter().enumerate() {
        let qh = cache.q.columns(h * dh, dh);
        let kh = cache.k.columns(h * dh, dh);
        let vh = cache.v.columns(h * dh, dh);
        let doh = dctx.columns(h * dh, dh);
        let dp = doh.matmul_t(&vh)?;
        dv.set_columns(h * dh, &p.t_matmul(&doh)?);
        let mut ds = Matrix::zeros(n, n);
        for r in 0..n {
            let (pr, dpr) = (p.row(r), dp.row(r));
            let dot: f64 = pr.iter().zip(dpr).map(|(a, b)| a * b).sum();
            for ((o, &pv), &g) in ds.row_mut(r).iter_mut().zip(pr).zip(dpr) {
                *o = pv * (g - dot) * scale;
            }
        }
        dq.set_columns(h * dh, &ds.matmul(&kh)?);
        dk.set_columns(h * dh, &ds.t_matmul(&qh)?);
    }
    Ok((dq, dk, dv))
}

fn gate_backward(gate: &GatingNetwork, trace: &GateTrace, dweights: &[f64]) -> Result<GateGrads> {
    let w = &trace.weights;
    let mean: f64 = w.iter().zip(dweights).map(|(a, b)| a * b).sum();
    let dlogits: Vec<f64> = w
        .iter()
        .zip(dweights)
        .map(|(wk, gk)| wk * (gk - mean))
        .collect();
    let dlogits = Matrix::row_vector(&dlogits);
    let dw2 = trace.hidden.t_matmul(&dlogits)?;
    let dhidden = dlogits.matmul_t(&gate.w2)?;
    let dz = dhidden.hadamard(&trace.hidden.map(|t| 1.0 - t * t))?;
    let dw1 = trace.pooled.t_matmul(&dz)?;
    Ok(GateGrads {
        w1: dw1,
        b1: dz,
        w2: dw2,
        b2: dlogits,
    })
}
