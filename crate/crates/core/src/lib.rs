//! Mixture-of-Transformers blocks with anchor-guided routing over LoRA experts,
//! plus the mask annealing pipeline (fine mask, perturbed rough mask, bounding
//! box) used to degrade mask precision over the course of training.
//!
//! The crate is split into:
//!
//! * [`numerics`]: matrices, softmax, a seeded RNG and 2-D Perlin noise.
//! * [`mot`]: token fusion, gating, anchor-guided routing, LoRA-expert linears
//!   and the full block.
//! * [`mask`]: binary masks, dilation, contour tracing, Perlin displacement,
//!   rasterization, bounding boxes, PGM IO and the annealing schedule.
//! * [`training`]: a toy regression harness with analytic gradients and
//!   finite-difference verification.
//! * [`cli`]: the `motmask` command-line front end.

pub mod cli;
pub mod error;
pub mod mask;
pub mod mot;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
