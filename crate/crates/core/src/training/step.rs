use crate::error::{Error, Result};
use crate::mask::AnnealingSchedule;
use crate::mot::{LinearSlot, MoTBlock, TokenSequence};
use crate::numerics::Matrix;

use super::{sample_gradients, BlockGrads};

#[derive(Debug, Clone)]
pub struct TrainExample {
    pub input: TokenSequence,
    pub target: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub schedule: AnnealingSchedule,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            steps: 500,
            batch_size: 8,
            schedule: AnnealingSchedule::scaled(500),
            seed: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.steps == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "steps and batch size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One plain gradient-descent step on the batch-mean loss. Returns the updated
/// block and the loss before the update. Backbone weights are never touched.
pub fn train_step(
    block: &MoTBlock,
    batch: &[TrainExample],
    config: &TrainConfig,
) -> Result<(MoTBlock, f64)> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("training on an empty batch"));
    }
    let lr = config.learning_rate;
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::Config(format!("learning rate {lr}")));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut total = BlockGrads::zeros_like(block);
    let mut loss = 0.0;
    // Accumulate in batch order so results are bit-reproducible.
    for ex in batch {
        let g = sample_gradients(block, &ex.input, &ex.target)?;
        total.add_scaled(scale, &g.grads)?;
        loss += scale * g.loss;
    }
    if !loss.is_finite() || !total.is_finite() {
        return Err(Error::Numerical("non-finite batch gradient".into()));
    }

    let mut next = block.clone();
    let gate = &mut next.gate;
    gate.w1.add_scaled(-lr, &total.gate.w1)?;
    gate.b1.add_scaled(-lr, &total.gate.b1)?;
    gate.w2.add_scaled(-lr, &total.gate.w2)?;
    gate.b2.add_scaled(-lr, &total.gate.b2)?;
    for (slot, grads) in LinearSlot::ALL.iter().zip(&total.experts) {
        for (expert, (da, db)) in next.linear_mut(*slot).experts.iter_mut().zip(grads) {
            expert.a.add_scaled(-lr, da)?;
            expert.b.add_scaled(-lr, db)?;
        }
    }
    Ok((next, loss))
}
