//! Exact K-nearest-neighbour search under the Euclidean metric.
//!
//! Two backends answer the same query with identical output: an all-pairs
//! brute-force scan and a uniform-grid accelerator. Rows are ordered by
//! `(distance, index)`, so ties always go to the lower reference index.

mod grid;
mod real;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub use grid::GridIndex;
pub use real::{convert, dist2, Real};

use crate::{Error, Result};

/// Q×K neighbour table, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    k: usize,
    indices: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighborIndex {
    pub fn new(k: usize, indices: Vec<usize>, distances: Vec<f64>) -> Result<Self> {
        if k == 0 || !indices.len().is_multiple_of(k) || indices.len() != distances.len() {
            return Err(Error::Shape(format!(
                "neighbour table with k={k}, {} indices, {} distances",
                indices.len(),
                distances.len()
            )));
        }
        Ok(NeighborIndex { k, indices, distances })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_queries(&self) -> usize {
        self.indices.len() / self.k
    }

    pub fn row(&self, q: usize) -> &[usize] {
        &self.indices[q * self.k..(q + 1) * self.k]
    }

    pub fn row_distances(&self, q: usize) -> &[f64] {
        &self.distances[q * self.k..(q + 1) * self.k]
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KnnBackend {
    BruteForce,
    #[default]
    Grid,
}

/// Candidate ordered by `(squared distance, index)`.
#[derive(Clone, Copy)]
pub(crate) struct Candidate<P> {
    pub d2: P,
    pub idx: usize,
}

impl<P: Real> PartialEq for Candidate<P> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<P: Real> Eq for Candidate<P> {}
impl<P: Real> PartialOrd for Candidate<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<P: Real> Ord for Candidate<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.idx.cmp(&other.idx))
    }
}

/// Keeps the `k` smallest candidates seen so far.
pub(crate) struct TopK<P: Real> {
    k: usize,
    heap: BinaryHeap<Candidate<P>>,
}

impl<P: Real> TopK<P> {
    pub fn new(k: usize) -> Self {
        TopK { k, heap: BinaryHeap::with_capacity(k + 1) }
    }

    #[inline]
    pub fn offer(&mut self, c: Candidate<P>) {
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if let Some(mut top) = self.heap.peek_mut() {
            if c < *top {
                *top = c;
            }
        }
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() == self.k
    }

    /// Largest retained squared distance, if full.
    pub fn bound(&self) -> Option<P> {
        if self.is_full() {
            self.heap.peek().map(|c| c.d2)
        } else {
            None
        }
    }

    pub fn drain_sorted(&mut self, indices: &mut Vec<usize>, distances: &mut Vec<f64>) {
        let sorted = std::mem::take(&mut self.heap).into_sorted_vec();
        for c in sorted {
            indices.push(c.idx);
            distances.push(c.d2.sqrt().to_f64());
        }
    }
}

fn check_args(n_ref: usize, n_query: usize, k: usize) -> Result<()> {
    if n_ref == 0 {
        return Err(Error::Argument("reference set is empty".into()));
    }
    if n_query == 0 {
        return Err(Error::Argument("query set is empty".into()));
    }
    if k == 0 || k > n_ref {
        return Err(Error::Argument(format!("k={k} must lie in 1..={n_ref}")));
    }
    Ok(())
}

/// All-pairs scan; the reference oracle for the grid backend.
pub fn knn_brute_force<P: Real>(reference: &[[P; 3]], queries: &[[P; 3]], k: usize) -> Result<NeighborIndex> {
    check_args(reference.len(), queries.len(), k)?;
    let mut indices = Vec::with_capacity(queries.len() * k);
    let mut distances = Vec::with_capacity(queries.len() * k);
    let mut top = TopK::new(k);
    for q in queries {
        for (idx, p) in reference.iter().enumerate() {
            top.offer(Candidate { d2: dist2(q, p), idx });
        }
        top.drain_sorted(&mut indices, &mut distances);
    }
    NeighborIndex::new(k, indices, distances)
}

/// K nearest reference points for every query, using `backend`.
pub fn knn_with<P: Real>(
    backend: KnnBackend,
    reference: &[[P; 3]],
    queries: &[[P; 3]],
    k: usize,
) -> Result<NeighborIndex> {
    match backend {
        KnnBackend::BruteForce => knn_brute_force(reference, queries, k),
        KnnBackend::Grid => {
            check_args(reference.len(), queries.len(), k)?;
            GridIndex::build(reference).query(queries, k)
        }
    }
}

/// K nearest reference points for every query (grid backend).
///
/// A query that coincides with a reference point gets that point at distance
/// 0; when several reference points coincide the lowest index comes first.
pub fn knn(reference: &[[f64; 3]], queries: &[[f64; 3]], k: usize) -> Result<NeighborIndex> {
    knn_with(KnnBackend::Grid, reference, queries, k)
}

/// Single nearest reference point per query.
pub fn nearest_one(reference: &[[f64; 3]], queries: &[[f64; 3]]) -> Result<NeighborIndex> {
    knn(reference, queries, 1)
}
