use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mask::{augment_for_stage, sample_seed, AnnealingSchedule, AugmentConfig, Stage};
use crate::mot::{MoTBlock, MotConfig};
use crate::numerics::{mix_seed, SeededRng};

use super::{
    gen_toy_task, specialization_report, train_step, SpecializationReport, ToyTask, TrainConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ToyRunConfig {
    pub categories: usize,
    pub per_category: usize,
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub model: MotConfig,
    /// Mask coarsening used during the rough and bbox stages. Its `seed`
    /// field is ignored; each sample gets a per-step seed.
    pub augment: AugmentConfig,
}

impl Default for ToyRunConfig {
    fn default() -> Self {
        Self {
            categories: 4,
            per_category: 16,
            steps: 500,
            batch_size: 8,
            learning_rate: 0.05,
            seed: 7,
            model: MotConfig::default(),
            augment: AugmentConfig {
                a: 1.0,
                alpha: 1.5,
                scale: 0.15,
                delta: 1000.0,
                seed: 0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub stage: Stage,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct ToyRun {
    pub task: ToyTask,
    pub schedule: AnnealingSchedule,
    pub records: Vec<StepRecord>,
    pub initial_report: SpecializationReport,
    pub final_report: SpecializationReport,
    pub block: MoTBlock,
}

impl ToyRun {
    pub fn mean_loss(&self, from: usize, to: usize) -> f64 {
        let r = &self.records[from.min(self.records.len())..to.min(self.records.len())];
        r.iter().map(|s| s.loss).sum::<f64>() / r.len().max(1) as f64
    }

    /// One JSON object per line: `{"step":..,"stage":..,"loss":..}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Trains a freshly initialised block on a seeded toy task, moving through
/// the fine, rough and bbox mask stages in the ratio 2:1:1.
pub fn run_toy(cfg: &ToyRunConfig) -> Result<ToyRun> {
    cfg.model.validate()?;
    cfg.augment.validate()?;
    let schedule = AnnealingSchedule::scaled(cfg.steps);
    let train_cfg = TrainConfig {
        learning_rate: cfg.learning_rate,
        steps: cfg.steps,
        batch_size: cfg.batch_size,
        schedule,
        seed: cfg.seed,
    };
    train_cfg.validate()?;

    let task = gen_toy_task(
        cfg.categories,
        cfg.per_category,
        cfg.model.d_model,
        cfg.seed,
    )?;
    let mut block = MoTBlock::init(&MotConfig {
        seed: mix_seed(cfg.seed, &[cfg.model.seed]),
        ..cfg.model.clone()
    })?;
    let initial_report = specialization_report(&block, &task)?;
    let mut rng = SeededRng::new(mix_seed(cfg.seed, &[0xBA7C]));
    let mut records = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let stage = schedule.stage(step)?;
        let mut batch = Vec::with_capacity(cfg.batch_size);
        for _ in 0..cfg.batch_size {
            let idx = rng.below(task.len());
            let params = crate::mask::PerturbParams {
                seed: sample_seed(cfg.seed, step as u64, idx as u64),
                ..cfg.augment.perturb()
            };
            let mask = augment_for_stage(&task.samples[idx].mask, stage, cfg.augment.a, &params)?;
            batch.push(task.example(idx, &mask)?);
        }
        let (next, loss) = train_step(&block, &batch, &train_cfg)?;
        block = next;
        records.push(StepRecord { step, stage, loss });
    }
    let final_report = specialization_report(&block, &task)?;
    Ok(ToyRun {
        task,
        schedule,
        records,
        initial_report,
        final_report,
        block,
    })
}
