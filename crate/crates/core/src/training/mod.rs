//! Toy-scale training: synthetic per-category regression, analytic gradients
//! for every LoRA factor and gate parameter, finite-difference verification,
//! and routing-specialization measurement.
//!
//! Selection through anchor-guided routing is treated as constant within a
//! step: gradients reach the gate only through the softmax weights of the
//! experts that were active.

mod backward;
mod gradcheck;
mod harness;
mod loss;
mod report;
mod step;
mod toy;

pub use backward::{sample_gradients, BlockGrads, GateGrads, SampleGradients};
pub use gradcheck::{grad_check, GradReport, GroupReport, ParamGroup, FD_STEP};
pub use harness::{run_toy, StepRecord, ToyRun, ToyRunConfig};
pub use loss::{mse, mse_grad};
pub use report::{specialization_report, SpecializationReport};
pub use step::{train_step, TrainConfig, TrainExample};
pub use toy::{gen_toy_task, mask_token, ToySample, ToyTask};
