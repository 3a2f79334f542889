//! Efficient semantic segmentation of large point clouds.
//!
//! The crate is organised bottom-up:
//!
//! - [`cloud`]: point-cloud data model, ASCII PLY / KITTI scan I/O and
//!   seeded synthetic scenes.
//! - [`spatial`]: exact K-nearest-neighbour search (brute force and a
//!   uniform-grid accelerator with identical results).
//! - [`sampling`]: random, farthest-point, inverse-density and
//!   Gumbel-softmax samplers plus a decimation benchmark harness that
//!   records wall-clock time and peak transient allocation.
//! - [`tensor`]: a small dense tensor type with a reverse-mode tape, Adam
//!   and a binary checkpoint format.
//! - [`aggregation`]: local spatial encoding, attentive pooling, the dilated
//!   residual block and the resampling layers.
//! - [`network`]: the encoder/decoder segmentation network, training loop
//!   and segmentation metrics.
//! - [`cli`]: the command implementations behind the `randla` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod aggregation;
pub mod cli;
pub mod cloud;
mod error;
pub mod network;
pub mod sampling;
pub mod spatial;
pub mod tensor;

pub use error::{Error, Result};

#[cfg(feature = "alloc-stats")]
#[global_allocator]
static GLOBAL: sampling::alloc::CountingAllocator = sampling::alloc::CountingAllocator::new();
