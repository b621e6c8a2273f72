//! The two-branch autoregressive network.
//!
//! Left branch: five convolution blocks over the `[2k, S]` vibration block.
//! Right branch: a 1×1 convolution over the `k` most recent HI values.
//! Both are flattened, concatenated and mapped to one HI value by the
//! `linear → relu → dropout → linear` head.

mod config;
mod network;
mod state;

pub use config::{Ablation, ModelConfig, CHANNEL_PLAN, POOL_PLAN};
pub use network::{ArNetwork, ConvBlock, CHECKPOINT_FILE, MANIFEST_FILE};
pub use state::{ArState, InitMode};
