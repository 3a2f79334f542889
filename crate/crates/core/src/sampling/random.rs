use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{instrument, SampleResult, Selection};
use crate::{Error, Result};

pub(crate) fn random_indices(n_points: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > n_points {
        return Err(Error::Argument(format!("cannot draw {k} of {n_points} points")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, n_points, k).into_vec())
}

/// Draws `k` distinct indices out of `n_points` uniformly at random.
///
/// The cost depends on `k` only, not on how many points the cloud holds.
pub fn random_sample(n_points: usize, k: usize, seed: u64) -> Result<SampleResult> {
    let (selected, elapsed, peak_bytes) = instrument(|| random_indices(n_points, k, seed));
    Ok(SampleResult { selected: Selection::Indices(selected?), elapsed, peak_bytes })
}
