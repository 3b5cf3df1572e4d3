use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the always-active backbone expert.
pub const BACKBONE_EXPERT: usize = 0;

const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// What to do when no assistant outweighs the backbone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgrFallback {
    /// Also activate the single highest-weighted assistant (lowest index on ties).
    #[default]
    Assistant,
    /// Use the maximum weight as the threshold instead: activate every assistant
    /// whose weight equals the maximum. May leave the backbone alone.
    TopWeight,
}

/// Routing weights and the expert set selected from them.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingDecision {
    weights: Vec<f64>,
    active_set: Vec<usize>,
    backbone_index: usize,
    fallback: Vec<usize>,
}

impl RoutingDecision {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Active experts in ascending index order.
    pub fn active_set(&self) -> &[usize] {
        &self.active_set
    }

    pub fn backbone_index(&self) -> usize {
        self.backbone_index
    }

    /// Assistants activated by the fallback rule rather than the threshold.
    pub fn fallback(&self) -> &[usize] {
        &self.fallback
    }

    pub fn is_active(&self, expert: usize) -> bool {
        self.active_set.binary_search(&expert).is_ok()
    }

    pub fn n_experts(&self) -> usize {
        self.weights.len()
    }

    /// Same active set with different weights. Used when the selection is held
    /// fixed while weights move (gradient steps and finite differences).
    pub(crate) fn with_weights(&self, weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), self.weights.len());
        Self {
            weights,
            ..self.clone()
        }
    }
}

/// Anchor-guided selection: the backbone is always active and every assistant
/// whose weight strictly exceeds the backbone's joins it. If none does, the
/// `fallback` rule decides.
pub fn agr_select(
    weights: &[f64],
    backbone_index: usize,
    fallback: AgrFallback,
) -> Result<RoutingDecision> {
    if weights.is_empty() {
        return Err(Error::Routing("no routing weights".into()));
    }
    if backbone_index >= weights.len() {
        return Err(Error::Routing(format!(
            "backbone index {backbone_index} out of range for {} experts",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Routing(
            "weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(Error::Routing(format!("weights sum to {total}, not 1")));
    }

    let anchor = weights[backbone_index];
    let mut active: Vec<usize> = (0..weights.len())
        .filter(|&i| i == backbone_index || weights[i] > anchor)
        .collect();

    let mut chosen = Vec::new();
    if active.len() == 1 {
        let assistants = (0..weights.len()).filter(|&i| i != backbone_index);
        match fallback {
            AgrFallback::Assistant => {
                // Strict `>` keeps the lowest index among tied maxima.
                let best = assistants.fold(None, |best: Option<usize>, i| match best {
                    Some(b) if weights[i] <= weights[b] => Some(b),
                    _ => Some(i),
                });
                chosen.extend(best);
            }
            AgrFallback::TopWeight => {
                let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                chosen.extend(assistants.filter(|&i| weights[i] == max));
            }
        }
        active.extend_from_slice(&chosen);
        active.sort_unstable();
    }

    Ok(RoutingDecision {
        weights: weights.to_vec(),
        active_set: active,
        backbone_index,
        fallback: chosen,
    })
}
