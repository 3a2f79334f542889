use std::cmp::Ordering;

use super::{instrument, SampleResult, Selection};
use crate::spatial::{knn_with, KnnBackend, Real};
use crate::{Error, Result};

/// Neighbour count used for the density proxy unless configured otherwise.
pub const DEFAULT_DENSITY_NEIGHBORS: usize = 16;

/// Which end of the ranking is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityPolarity {
    /// Rank by `1/ρ` descending, `ρ` being the neighbour-distance sum.
    /// This keeps points whose neighbours are closest.
    #[default]
    Literal,
    /// Rank by `ρ` descending, keeping points in sparse regions first.
    Inverted,
}

/// `ρ(p_i)`: sum of distances from `p_i` to its `t` nearest other points,
/// accumulated nearest first.
pub fn density<P: Real>(points: &[[P; 3]], t: usize) -> Result<Vec<f64>> {
    let n = points.len();
    if t == 0 || t >= n {
        return Err(Error::Argument(format!("density needs 1 <= t < N, got t={t}, N={n}")));
    }
    let nn = knn_with(KnnBackend::Grid, points, points, t + 1)?;
    Ok((0..n)
        .map(|i| {
            let row = nn.row(i);
            let dist = nn.row_distances(i);
            // Drop the point itself; if coincident lower indices pushed it out, drop the last.
            let skip = row.iter().position(|&j| j == i).unwrap_or(t);
            dist.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, d)| d).sum()
        })
        .collect())
}

pub(crate) fn rank_by_density(rho: &[f64], k: usize, polarity: DensityPolarity) -> Vec<usize> {
    let key: Vec<f64> = match polarity {
        DensityPolarity::Literal => rho.iter().map(|r| 1.0 / r).collect(),
        DensityPolarity::Inverted => rho.to_vec(),
    };
    let mut order: Vec<usize> = (0..rho.len()).collect();
    let cmp = |a: &usize, b: &usize| -> Ordering { key[*b].total_cmp(&key[*a]).then(a.cmp(b)) };
    if k < order.len() {
        order.select_nth_unstable_by(k, cmp);
        order.truncate(k);
    }
    order.sort_unstable_by(cmp);
    order
}

pub(crate) fn idis_indices<P: Real>(
    points: &[[P; 3]],
    k: usize,
    t: usize,
    polarity: DensityPolarity,
) -> Result<Vec<usize>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("cannot select {k} of {n} points")));
    }
    let rho = density(points, t)?;
    Ok(rank_by_density(&rho, k, polarity))
}

/// Inverse-density importance sampling: the top `k` points by `1/ρ`
/// (or by `ρ` with [`DensityPolarity::Inverted`]); ties go to the lower index.
///
/// With every point coincident all densities are 0 and the first `k`
/// indices are returned.
pub fn inverse_density_sample<P: Real>(
    points: &[[P; 3]],
    k: usize,
    t: usize,
    polarity: DensityPolarity,
) -> Result<SampleResult> {
    let (selected, elapsed, peak_bytes) = instrument(|| idis_indices(points, k, t, polarity));
    Ok(SampleResult { selected: Selection::Indices(selected?), elapsed, peak_bytes })
}
