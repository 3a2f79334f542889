//! Time and memory of repeated decimation, per sampler and cloud size.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::crs::crs_points_until;
use super::fps::fps_indices;
use super::idis::idis_indices;
use super::random::random_indices;
use super::{alloc, Deadline, DensityPolarity, GumbelNoise, DEFAULT_DENSITY_NEIGHBORS};
use crate::spatial::Real;
use crate::tensor::Tensor;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "method,n_points,step_ratio,steps,elapsed_s,peak_bytes,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Rs,
    Fps,
    Idis,
    Crs,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Rs, Method::Fps, Method::Idis, Method::Crs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rs => "rs",
            Method::Fps => "fps",
            Method::Idis => "idis",
            Method::Crs => "crs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Argument(format!("unknown sampling method `{s}` (expected rs, fps, idis, crs)")))
    }
}

/// Repeated decimation: `steps` rounds, each keeping `ceil(n · ratio)` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecimationPlan {
    pub steps: usize,
    pub ratio: f64,
}

impl Default for DecimationPlan {
    fn default() -> Self {
        DecimationPlan { steps: 5, ratio: 0.25 }
    }
}

impl DecimationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("decimation plan needs at least one step".into()));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Config(format!("retain ratio must lie in (0, 1), got {}", self.ratio)));
        }
        Ok(())
    }

    /// Point counts after each step, starting from `n`.
    pub fn cascade(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.steps);
        let mut cur = n;
        for _ in 0..self.steps {
            cur = ((cur as f64 * self.ratio).ceil() as usize).max(1);
            out.push(cur);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F64,
    F32,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub plan: DecimationPlan,
    pub methods: Vec<Method>,
    /// Wall-clock limit per (size, method) cell.
    pub time_budget: Duration,
    /// Largest CRS weight matrix (bytes) the harness will allocate.
    pub memory_budget: usize,
    pub precision: Precision,
    pub idis_neighbors: usize,
    pub idis_polarity: DensityPolarity,
    pub crs_tau: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![1_000, 10_000, 100_000],
            plan: DecimationPlan::default(),
            methods: Method::ALL.to_vec(),
            time_budget: Duration::from_secs(300),
            memory_budget: 1 << 30,
            precision: Precision::F64,
            idis_neighbors: DEFAULT_DENSITY_NEIGHBORS,
            idis_polarity: DensityPolarity::Literal,
            crs_tau: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// The time budget ran out before the plan finished.
    Timeout,
    /// The CRS weight matrix would exceed the memory budget; not run.
    OverMemory,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Timeout => "timeout",
            CellStatus::OverMemory => "over_memory",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub n_points: usize,
    pub step_ratio: f64,
    pub steps: usize,
    /// Summed over the steps that ran.
    pub elapsed: Duration,
    /// Largest per-step peak of transient allocation.
    pub peak_bytes: usize,
    pub status: CellStatus,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, method: Method, n_points: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method && r.n_points == n_points)
    }

    pub fn has_incomplete(&self) -> bool {
        self.rows.iter().any(|r| r.status != CellStatus::Ok)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.9},{},{}",
                r.method,
                r.n_points,
                r.step_ratio,
                r.steps,
                r.elapsed.as_secs_f64(),
                r.peak_bytes,
                r.status.as_str()
            );
        }
        out
    }
}

/// Seeded uniform cloud in the unit cube.
pub fn uniform_cloud(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
}

/// Score vector for CRS: softmax of a fixed random linear score over the points.
fn crs_scores<P: Real>(points: &[[P; 3]], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let w: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let logits: Vec<f64> =
        points.iter().map(|p| w[0] * p[0].to_f64() + w[1] * p[1].to_f64() + w[2] * p[2].to_f64()).collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = s.iter().sum();
    s.iter_mut().for_each(|v| *v /= total);
    s
}

enum StepOutcome<P> {
    Done(Vec<[P; 3]>),
    Timeout,
}

fn run_step<P: Real>(
    method: Method,
    points: &[[P; 3]],
    k: usize,
    cfg: &BenchConfig,
    step_seed: u64,
    deadline: Deadline,
) -> Result<StepOutcome<P>> {
    let gather = |idx: &[usize]| idx.iter().map(|&i| points[i]).collect::<Vec<_>>();
    Ok(match method {
        Method::Rs => StepOutcome::Done(gather(&random_indices(points.len(), k, step_seed)?)),
        Method::Fps => match fps_indices(points, k, 0, deadline)? {
            Some(idx) => StepOutcome::Done(gather(&idx)),
            None => StepOutcome::Timeout,
        },
        Method::Idis => {
            let t = cfg.idis_neighbors.min(points.len().saturating_sub(1)).max(1);
            if points.len() < 2 {
                StepOutcome::Done(points.to_vec())
            } else {
                StepOutcome::Done(gather(&idis_indices(points, k, t, cfg.idis_polarity)?))
            }
        }
        Method::Crs => {
            let feats = Tensor::new(
                vec![points.len(), 3],
                points.iter().flat_map(|p| [p[0].to_f64(), p[1].to_f64(), p[2].to_f64()]).collect(),
            )?;
            let scores = crs_scores(points, step_seed);
            match crs_points_until(&feats, &scores, k, cfg.crs_tau, GumbelNoise::Seeded(step_seed), deadline)? {
                Some(soft) => StepOutcome::Done(
                    soft.data()
                        .chunks_exact(3)
                        .map(|c| [P::from_f64(c[0]), P::from_f64(c[1]), P::from_f64(c[2])])
                        .collect(),
                ),
                None => StepOutcome::Timeout,
            }
        }
    })
}

fn run_cell<P: Real>(method: Method, n: usize, cfg: &BenchConfig) -> Result<BenchRow> {
    let cloud: Vec<[P; 3]> = crate::spatial::convert(&uniform_cloud(n, cfg.seed ^ n as u64));
    let mut row = BenchRow {
        method,
        n_points: n,
        step_ratio: cfg.plan.ratio,
        steps: cfg.plan.steps,
        elapsed: Duration::ZERO,
        peak_bytes: 0,
        status: CellStatus::Ok,
    };
    if method == Method::Crs {
        let k = cfg.plan.cascade(n)[0];
        let bytes = n.saturating_mul(k).saturating_mul(std::mem::size_of::<f64>());
        if bytes > cfg.memory_budget {
            row.status = CellStatus::OverMemory;
            row.peak_bytes = bytes;
            return Ok(row);
        }
    }
    let deadline = Deadline::at(Instant::now() + cfg.time_budget);
    let mut points = cloud;
    for (step, k) in cfg.plan.cascade(n).into_iter().enumerate() {
        let step_seed = cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(step as u64);
        let start = Instant::now();
        let (outcome, peak) = alloc::measure(|| run_step(method, &points, k, cfg, step_seed, deadline));
        row.elapsed += start.elapsed();
        row.peak_bytes = row.peak_bytes.max(peak);
        match outcome? {
            StepOutcome::Done(next) => points = next,
            StepOutcome::Timeout => {
                row.status = CellStatus::Timeout;
                break;
            }
        }
        if deadline.passed() && step + 1 < cfg.plan.steps {
            row.status = CellStatus::Timeout;
            break;
        }
    }
    Ok(row)
}

/// Runs every (size, method) cell sequentially and collects one row each.
///
/// A cell that exceeds its budget is reported with a non-`ok` status instead
/// of failing the run.
pub fn run_decimation_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.plan.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::Argument("no sampling methods requested".into()));
    }
    if cfg.sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Argument("cloud sizes must be sorted ascending".into()));
    }
    if cfg.sizes.contains(&0) {
        return Err(Error::Argument("cloud sizes must be positive".into()));
    }
    let mut report = BenchReport::default();
    for &n in &cfg.sizes {
        for &m in &cfg.methods {
            let row = match cfg.precision {
                Precision::F64 => run_cell::<f64>(m, n, cfg)?,
                Precision::F32 => run_cell::<f32>(m, n, cfg)?,
            };
            report.rows.push(row);
        }
    }
    Ok(report)
}
