//! Dense tensors, a reverse-mode differentiation tape, Adam and checkpoints.

mod adam;
mod checkpoint;
mod gemm;
pub mod gradcheck;
mod graph;
mod params;
mod tensor;

pub use adam::{adam_step, lr_decay, AdamState, LR_DECAY};
pub use checkpoint::{read_checkpoint, write_checkpoint, MAGIC, VERSION};
pub(crate) use gemm::{gemm, View};
pub use graph::{Activation, Graph, Reduce, Var, DEFAULT_LEAKY_SLOPE};
pub use params::{Linear, MlpParams, ParamId, ParamStore};
pub use tensor::Tensor;
