//! The encoder-decoder segmentation network, its training loop and metrics.

mod config;
mod metrics;
mod model;
mod toy;
mod train;

pub use config::{ClassWeighting, NetworkConfig, MIN_POINTS};
pub use metrics::{ConfusionMatrix, SegmentationMetrics};
pub use model::{argmax_rows, build_network, derive_seed, Mode, Network, NetworkInput, ShapeTrace};
pub use train::{
    evaluate, inverse_frequency_weights, train, train_with, EpochRecord, Scene, TrainOptions, TrainingReport,
    DEFAULT_LEARNING_RATE,
};
pub use toy::{run_toy, Ablation, ToyRun, ToyTask};
