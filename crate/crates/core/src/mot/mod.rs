//! Mixture-of-Transformers layer: token fusion, gating, anchor-guided routing
//! and LoRA-expert linears sharing one routing decision per block.

mod block;
mod config;
mod gate;
mod lora;
mod routing;
mod tokens;
mod weights;

pub use block::{
    attention, layer_norm, BlockCache, BlockOutput, ForwardObserver, LinearSlot, MoTBlock,
    NoopObserver, LN_EPS,
};
pub use config::MotConfig;
pub use gate::{GateTrace, GatingNetwork};
pub use lora::{LoraExpert, MoTLinear};
pub use routing::{agr_select, AgrFallback, RoutingDecision, BACKBONE_EXPERT};
pub use tokens::{fuse, Modality, TokenSequence};
pub use weights::{read_block, write_block, WEIGHTS_MAGIC, WEIGHTS_VERSION};
