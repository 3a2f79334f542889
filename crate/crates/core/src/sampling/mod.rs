//! Point sampling strategies and the decimation benchmark.
//!
//! | strategy | selection | cost |
//! |---|---|---|
//! | [`random_sample`] | uniform, without replacement | O(K) |
//! | [`farthest_point_sample`] | greedy max-min | O(N·K) |
//! | [`inverse_density_sample`] | rank by inverse neighbour-distance sum | KNN + sort |
//! | [`crs_sample`] | Gumbel-softmax soft points | O(N·K·D), N×K weights |
//!
//! Every sampler returns a [`SampleResult`] carrying wall-clock time and the
//! peak transient allocation of the call (see [`alloc`]).

pub mod alloc;
mod bench;
mod crs;
mod fps;
mod idis;
mod random;

use std::time::{Duration, Instant};

pub use bench::{
    run_decimation_benchmark, uniform_cloud, BenchConfig, BenchReport, BenchRow, CellStatus, DecimationPlan, Method,
    Precision, CSV_HEADER,
};
pub use crs::{crs_sample, crs_weights, GumbelNoise};
pub use fps::farthest_point_sample;
pub use idis::{density, inverse_density_sample, DensityPolarity, DEFAULT_DENSITY_NEIGHBORS};
pub use random::random_sample;

use crate::tensor::Tensor;

/// What a sampler picked.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    /// Distinct point indices, in selection order.
    Indices(Vec<usize>),
    /// K×(d+3) soft point vectors.
    Soft(Tensor),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub selected: Selection,
    pub elapsed: Duration,
    pub peak_bytes: usize,
}

impl SampleResult {
    /// Selected indices; empty for soft selections.
    pub fn indices(&self) -> &[usize] {
        match &self.selected {
            Selection::Indices(v) => v,
            Selection::Soft(_) => &[],
        }
    }
}

/// Times `f` and measures its peak transient allocation.
pub(crate) fn instrument<R>(f: impl FnOnce() -> R) -> (R, Duration, usize) {
    let start = Instant::now();
    let (out, peak) = alloc::measure(f);
    (out, start.elapsed(), peak)
}

/// Optional wall-clock limit checked cooperatively by long-running samplers.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Deadline(Option<Instant>);

impl Deadline {
    pub fn at(t: Instant) -> Self {
        Deadline(Some(t))
    }

    pub fn none() -> Self {
        Deadline(None)
    }

    #[inline]
    pub fn passed(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}
