use serde::Serialize;

use crate::error::Result;
use crate::mot::{LinearSlot, MoTBlock, TokenSequence};
use crate::numerics::Matrix;

use super::backward::{loss_with_fixed_selection, sample_gradients, BlockGrads};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

const REL_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamGroup {
    Gate,
    LoraA,
    LoraB,
    Backbone,
}

impl ParamGroup {
    pub const ALL: [ParamGroup; 4] = [
        ParamGroup::Gate,
        ParamGroup::LoraA,
        ParamGroup::LoraB,
        ParamGroup::Backbone,
    ];

    pub fn is_trained(self) -> bool {
        self != ParamGroup::Backbone
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupReport {
    pub group: ParamGroup,
    pub trained: bool,
    pub n_params: usize,
    /// `max |analytic - fd| / max(1e-8, |fd|)`; zero for untrained groups.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub max_abs_gradient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradReport {
    pub loss: f64,
    pub groups: Vec<GroupReport>,
}

impl GradReport {
    pub fn group(&self, g: ParamGroup) -> &GroupReport {
        self.groups
            .iter()
            .find(|r| r.group == g)
            .expect("every group is reported")
    }

    pub fn max_rel_error(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.max_rel_error)
            .fold(0.0, f64::max)
    }
}

/// Compares analytic gradients with central differences for every scalar
/// parameter. The active expert set is the one chosen at the unperturbed
/// point, matching how gradients treat selection.
pub fn grad_check(block: &MoTBlock, input: &TokenSequence, target: &Matrix) -> Result<GradReport> {
    let base = sample_gradients(block, input, target)?;
    let mut work = block.clone();
    let mut groups = Vec::new();
    for group in ParamGroup::ALL {
        let count = param_count(block, group);
        let mut report = GroupReport {
            group,
            trained: group.is_trained(),
            n_params: 0,
            max_rel_error: 0.0,
            max_abs_error: 0.0,
            max_abs_gradient: 0.0,
        };
        for m in 0..count {
            let len = param_mut(&mut work, group, m).data().len();
            report.n_params += len;
            if !group.is_trained() {
                continue;
            }
            let analytic = grad_matrix(&base.grads, group, m).data().to_vec();
            for (k, &a) in analytic.iter().enumerate() {
                let orig = param_mut(&mut work, group, m).data()[k];
                param_mut(&mut work, group, m).data_mut()[k] = orig + FD_STEP;
                let plus = loss_with_fixed_selection(&work, input, target, &base.routing)?;
                param_mut(&mut work, group, m).data_mut()[k] = orig - FD_STEP;
                let minus = loss_with_fixed_selection(&work, input, target, &base.routing)?;
                param_mut(&mut work, group, m).data_mut()[k] = orig;

                let fd = (plus - minus) / (2.0 * FD_STEP);
                let abs = (a - fd).abs();
                report.max_abs_error = report.max_abs_error.max(abs);
                report.max_rel_error = report.max_rel_error.max(abs / fd.abs().max(REL_FLOOR));
                report.max_abs_gradient = report.max_abs_gradient.max(a.abs());
            }
        }
        groups.push(report);
    }
    Ok(GradReport {
        loss: base.loss,
        groups,
    })
}

fn param_count(block: &MoTBlock, group: ParamGroup) -> usize {
    let per_slot = block.n_experts();
    match group {
        ParamGroup::Gate => 4,
        ParamGroup::LoraA | ParamGroup::LoraB => LinearSlot::ALL.len() * per_slot,
        ParamGroup::Backbone => LinearSlot::ALL.len(),
    }
}

fn param_mut(block: &mut MoTBlock, group: ParamGroup, m: usize) -> &mut Matrix {
    let n = block.n_experts();
    match group {
        ParamGroup::Gate => {
            let g = &mut block.gate;
            [&mut g.w1, &mut g.b1, &mut g.w2, &mut g.b2]
                .into_iter()
                .nth(m)
                .expect("four gate matrices")
        }
        ParamGroup::LoraA => &mut block.linear_mut(LinearSlot::ALL[m / n]).experts[m % n].a,
        ParamGroup::LoraB => &mut block.linear_mut(LinearSlot::ALL[m / n]).experts[m % n].b,
        ParamGroup::Backbone => &mut block.linear_mut(LinearSlot::ALL[m]).w0,
    }
}

fn grad_matrix(grads: &BlockGrads, group: ParamGroup, m: usize) -> &Matrix {
    let n = grads.experts[0].len();
    match group {
        ParamGroup::Gate => {
            let g = &grads.gate;
            [&g.w1, &g.b1, &g.w2, &g.b2][m]
        }
        ParamGroup::LoraA => &grads.experts[m / n][m % n].0,
        ParamGroup::LoraB => &grads.experts[m / n][m % n].1,
        ParamGroup::Backbone => unreachable!("backbone weights have no gradient"),
    }
}
