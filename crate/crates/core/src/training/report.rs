use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mot::MoTBlock;
use crate::numerics::entropy;

use super::ToyTask;

/// How routing distributes over assistants for each toy category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecializationReport {
    /// `[category][expert]`: how many of the category's samples put their
    /// largest assistant weight on `expert`. The backbone column stays zero.
    pub per_category_expert_histogram: Vec<Vec<usize>>,
    /// Gate entropy (nats) averaged over all samples.
    pub mean_routing_entropy: f64,
    pub per_category_entropy: Vec<f64>,
    /// Most frequent argmax expert per category, lowest index on ties.
    pub dominant_expert: Vec<usize>,
}

/// Routes every task sample through `block` with its fine mask.
pub fn specialization_report(block: &MoTBlock, task: &ToyTask) -> Result<SpecializationReport> {
    if task.is_empty() {
        return Err(Error::EmptyInput("specialization report on an empty task"));
    }
    let n = block.n_experts();
    let mut hist = vec![vec![0usize; n]; task.n_categories];
    let mut ent_sum = vec![0.0; task.n_categories];
    let mut counts = vec![0usize; task.n_categories];
    for (i, s) in task.samples.iter().enumerate() {
        let ex = task.example(i, &s.mask)?;
        let routing = block.route(&ex.input)?;
        let w = routing.weights();
        let backbone = routing.backbone_index();
        let best = (0..n)
            .filter(|&e| e != backbone)
            .fold(None::<usize>, |acc, e| match acc {
                Some(b) if w[b] >= w[e] => Some(b),
                _ => Some(e),
            })
            .expect("at least one assistant");
        hist[s.category][best] += 1;
        ent_sum[s.category] += entropy(w);
        counts[s.category] += 1;
    }
    let per_category_entropy: Vec<f64> = ent_sum
        .iter()
        .zip(&counts)
        .map(|(&e, &c)| if c == 0 { 0.0 } else { e / c as f64 })
        .collect();
    let mean_routing_entropy = ent_sum.iter().sum::<f64>() / task.len() as f64;
    let dominant_expert = hist
        .iter()
        .map(|row| (0..n).fold(0, |b, e| if row[e] > row[b] { e } else { b }))
        .collect();
    Ok(SpecializationReport {
        per_category_expert_histogram: hist,
        mean_routing_entropy,
        per_category_entropy,
        dominant_expert,
    })
}
