//! Shallow value network (173 -> 512 -> 1) with hand-written backpropagation and Adam.

mod adam;
mod mlp;

pub use adam::{AdamState, DEFAULT_LR, DEFAULT_WEIGHT_DECAY};
pub use mlp::{loss, Batch, Gradients, LossKind, Mlp, Scalar, BCE_CLAMP, HIDDEN};
