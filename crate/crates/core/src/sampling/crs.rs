use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel};

use super::{instrument, Deadline, SampleResult, Selection};
use crate::tensor::{gemm, Tensor, View};
use crate::{Error, Result};

const SCORE_SUM_TOLERANCE: f64 = 1e-6;

/// Noise added to the log-scores before the tempered softmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GumbelNoise {
    /// Independent Gumbel(0, 1) draws, a fresh vector per output point.
    Seeded(u64),
    /// `g = 0`: the deterministic relaxation.
    Off,
}

fn check_inputs(scores: &[f64], tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Argument(format!("temperature must be positive, got {tau}")));
    }
    if scores.is_empty() {
        return Err(Error::Argument("empty score vector".into()));
    }
    if let Some(i) = scores.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Argument(format!("score {i} is not strictly positive: {}", scores[i])));
    }
    let sum: f64 = scores.iter().sum();
    if (sum - 1.0).abs() > SCORE_SUM_TOLERANCE {
        return Err(Error::Argument(format!("scores sum to {sum}, expected 1")));
    }
    Ok(())
}

pub(crate) fn crs_weights_until(
    scores: &[f64],
    k: usize,
    tau: f64,
    noise: GumbelNoise,
    deadline: Deadline,
) -> Result<Option<Vec<f64>>> {
    check_inputs(scores, tau)?;
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let n = scores.len();
    let log_s: Vec<f64> = scores.iter().map(|s| s.ln()).collect();
    let mut rng = match noise {
        GumbelNoise::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        GumbelNoise::Off => None,
    };
    let gumbel = Gumbel::new(0.0, 1.0).expect("standard Gumbel");
    let mut weights = vec![0.0; k * n];
    for row in weights.chunks_exact_mut(n) {
        if deadline.passed() {
            return Ok(None);
        }
        for (w, &l) in row.iter_mut().zip(&log_s) {
            let g = rng.as_mut().map_or(0.0, |r| gumbel.sample(r));
            *w = (l + g) / tau;
        }
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for w in row.iter_mut() {
            *w = (*w - max).exp();
            total += *w;
        }
        for w in row.iter_mut() {
            *w /= total;
        }
    }
    Ok(Some(weights))
}

/// K×N relaxation weights: row `j` is
/// `softmax_i((ln s_i + g_ij) / tau)`.
pub fn crs_weights(scores: &[f64], k: usize, tau: f64, noise: GumbelNoise) -> Result<Vec<f64>> {
    Ok(crs_weights_until(scores, k, tau, noise, Deadline::none())?.expect("no deadline set"))
}

pub(crate) fn crs_points_until(
    features: &Tensor,
    scores: &[f64],
    k: usize,
    tau: f64,
    noise: GumbelNoise,
    deadline: Deadline,
) -> Result<Option<Tensor>> {
    if features.shape().len() != 2 || features.shape()[0] != scores.len() {
        return Err(Error::Shape(format!(
            "features {:?} do not match {} scores",
            features.shape(),
            scores.len()
        )));
    }
    let (n, d) = (features.shape()[0], features.shape()[1]);
    let Some(weights) = crs_weights_until(scores, k, tau, noise, deadline)? else {
        return Ok(None);
    };
    let mut out = vec![0.0; k * d];
    gemm(k, n, d, View::rm(&weights, n), View::rm(features.data(), d), 0.0, &mut out);
    Tensor::new(vec![k, d], out).map(Some)
}

/// Continuous-relaxation sampling: `k` soft points, each a convex
/// combination of all feature rows under Gumbel-softmax weights.
///
/// `scores` must be a probability vector (strictly positive, summing to 1).
/// The full K×N weight matrix is materialised.
pub fn crs_sample(features: &Tensor, scores: &[f64], k: usize, tau: f64, noise: GumbelNoise) -> Result<SampleResult> {
    let (out, elapsed, peak_bytes) =
        instrument(|| crs_points_until(features, scores, k, tau, noise, Deadline::none()));
    let soft = out?.expect("no deadline set");
    Ok(SampleResult { selected: Selection::Soft(soft), elapsed, peak_bytes })
}
