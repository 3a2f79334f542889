use super::{dist2, Candidate, NeighborIndex, Real, TopK};
use crate::Result;

/// Target mean occupancy of a grid cell.
const POINTS_PER_CELL: f64 = 2.0;

/// Uniform grid over the bounding box of a reference set, stored CSR-style.
pub struct GridIndex<'a, P: Real> {
    points: &'a [[P; 3]],
    origin: [f64; 3],
    cell: f64,
    dims: [usize; 3],
    starts: Vec<usize>,
    members: Vec<usize>,
}

fn cell_count(extent: &[f64; 3], cell: f64) -> f64 {
    extent.iter().map(|&e| (e / cell).floor() + 1.0).product()
}

impl<'a, P: Real> GridIndex<'a, P> {
    pub fn build(points: &'a [[P; 3]]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for d in 0..3 {
                let v = p[d].to_f64();
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
        if points.is_empty() {
            lo = [0.0; 3];
            hi = [0.0; 3];
        }
        let extent = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
        let max_extent = extent.iter().cloned().fold(0.0, f64::max);

        // Smallest cell size whose cell count stays at or below the target.
        let target = (points.len() as f64 / POINTS_PER_CELL).max(1.0);
        let cell = if max_extent == 0.0 {
            1.0
        } else {
            let (mut a, mut b) = (max_extent * 1e-9, max_extent * 2.0);
            for _ in 0..64 {
                let mid = 0.5 * (a + b);
                if cell_count(&extent, mid) > target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            b
        };
        let dims = [
            (extent[0] / cell) as usize + 1,
            (extent[1] / cell) as usize + 1,
            (extent[2] / cell) as usize + 1,
        ];

        let mut grid = GridIndex { points, origin: lo, cell, dims, starts: Vec::new(), members: Vec::new() };
        let n_cells = dims[0] * dims[1] * dims[2];
        let cell_of: Vec<usize> = points.iter().map(|p| grid.flat(grid.coords(p))).collect();
        let mut starts = vec![0usize; n_cells + 1];
        for &c in &cell_of {
            starts[c + 1] += 1;
        }
        for i in 0..n_cells {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut members = vec![0usize; points.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            members[fill[c]] = i;
            fill[c] += 1;
        }
        grid.starts = starts;
        grid.members = members;
        grid
    }

    fn coords(&self, p: &[P; 3]) -> [usize; 3] {
        let mut c = [0usize; 3];
        for d in 0..3 {
            let t = ((p[d].to_f64() - self.origin[d]) / self.cell).floor();
            c[d] = if t <= 0.0 { 0 } else { (t as usize).min(self.dims[d] - 1) };
        }
        c
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    fn scan_cell(&self, q: &[P; 3], c: [usize; 3], top: &mut TopK<P>) {
        let f = self.flat(c);
        for &idx in &self.members[self.starts[f]..self.starts[f + 1]] {
            top.offer(Candidate { d2: dist2(q, &self.points[idx]), idx });
        }
    }

    /// Visits every cell at Chebyshev distance exactly `r` from `c`.
    fn scan_ring(&self, q: &[P; 3], c: [usize; 3], r: usize, top: &mut TopK<P>) {
        let range = |d: usize| {
            let lo = c[d].saturating_sub(r);
            let hi = (c[d] + r).min(self.dims[d] - 1);
            (lo, hi)
        };
        let (x0, x1) = range(0);
        let (y0, y1) = range(1);
        let (z0, z1) = range(2);
        let on_shell = |v: usize, d: usize| v + r == c[d] || v == c[d] + r;
        for x in x0..=x1 {
            for y in y0..=y1 {
                if on_shell(x, 0) || on_shell(y, 1) {
                    for z in z0..=z1 {
                        self.scan_cell(q, [x, y, z], top);
                    }
                } else {
                    if c[2] >= r {
                        self.scan_cell(q, [x, y, c[2] - r], top);
                    }
                    if r > 0 && c[2] + r < self.dims[2] {
                        self.scan_cell(q, [x, y, c[2] + r], top);
                    }
                }
            }
        }
    }

    /// Exact KNN; output matches [`super::knn_brute_force`] exactly.
    pub fn query(&self, queries: &[[P; 3]], k: usize) -> Result<NeighborIndex> {
        let max_ring = self.dims.iter().copied().max().unwrap_or(1);
        let mut indices = Vec::with_capacity(queries.len() * k);
        let mut distances = Vec::with_capacity(queries.len() * k);
        let mut top = TopK::new(k);
        for q in queries {
            let c = self.coords(q);
            for r in 0..=max_ring {
                self.scan_ring(q, c, r, &mut top);
                // Anything in ring r+1 or beyond is at least r cells away.
                if let Some(bound) = top.bound() {
                    let reach = r as f64 * self.cell;
                    if bound.to_f64() < reach * reach {
                        break;
                    }
                }
            }
            top.drain_sorted(&mut indices, &mut distances);
        }
        NeighborIndex::new(k, indices, distances)
    }
}

#[cfg(test)]
mod tests {
    use super::super::knn_brute_force;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(rng: &mut ChaCha8Rng, n: usize, flat: bool) -> Vec<[f64; 3]> {
        (0..n)
            .map(|_| {
                [
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                    if flat { 0.0 } else { rng.random_range(-1.0..1.0) },
                ]
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..20 {
            let n = rng.random_range(1..400);
            let reference = cloud(&mut rng, n, trial % 3 == 0);
            let queries = cloud(&mut rng, 50, false);
            let k = rng.random_range(1..=n.min(20));
            let fast = GridIndex::build(&reference).query(&queries, k).unwrap();
            let slow = knn_brute_force(&reference, &queries, k).unwrap();
            assert_eq!(fast, slow, "trial {trial}");
        }
    }

    #[test]
    fn queries_far_outside_the_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reference = cloud(&mut rng, 200, false);
        let queries = vec![[100.0, -40.0, 3.0], [-7.0, 0.0, 0.0]];
        let fast = GridIndex::build(&reference).query(&queries, 7).unwrap();
        assert_eq!(fast, knn_brute_force(&reference, &queries, 7).unwrap());
    }

    proptest! {
        // Coordinates on a coarse lattice make exact ties common.
        #[test]
        fn lattice_ties_agree(pts in prop::collection::vec(prop::array::uniform3(-4i32..4), 1..80), k in 1usize..10) {
            let reference: Vec<[f64; 3]> = pts.iter().map(|p| [p[0] as f64, p[1] as f64, p[2] as f64]).collect();
            let k = k.min(reference.len());
            let fast = GridIndex::build(&reference).query(&reference, k).unwrap();
            prop_assert_eq!(fast, knn_brute_force(&reference, &reference, k).unwrap());
        }
    }
}
