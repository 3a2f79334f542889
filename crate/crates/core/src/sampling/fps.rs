use super::{instrument, Deadline, SampleResult, Selection};
use crate::spatial::{dist2, Real};
use crate::{Error, Result};

/// Greedy max-min selection. Returns `None` if the deadline passes first.
pub(crate) fn fps_indices<P: Real>(
    points: &[[P; 3]],
    k: usize,
    start: usize,
    deadline: Deadline,
) -> Result<Option<Vec<usize>>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("cannot select {k} of {n} points")));
    }
    if start >= n {
        return Err(Error::Argument(format!("start index {start} out of range for {n} points")));
    }
    let mut chosen = vec![false; n];
    // Squared distance from every point to its nearest selected point.
    let mut nearest: Vec<P> = points.iter().map(|p| dist2(p, &points[start])).collect();
    let mut out = Vec::with_capacity(k);
    out.push(start);
    chosen[start] = true;
    while out.len() < k {
        if out.len() % 64 == 0 && deadline.passed() {
            return Ok(None);
        }
        let mut best: Option<(usize, P)> = None;
        for (i, &d) in nearest.iter().enumerate() {
            if chosen[i] {
                continue;
            }
            match best {
                Some((_, b)) if d.total_cmp(&b).is_le() => {}
                _ => best = Some((i, d)),
            }
        }
        let (pick, _) = best.expect("fewer unselected points than requested");
        chosen[pick] = true;
        out.push(pick);
        let anchor = points[pick];
        for (slot, p) in nearest.iter_mut().zip(points) {
            let d = dist2(p, &anchor);
            if d < *slot {
                *slot = d;
            }
        }
    }
    Ok(Some(out))
}

/// Farthest-point sampling starting at `start`.
///
/// Each new index maximises the distance to its nearest already-selected
/// point; ties go to the lower index.
pub fn farthest_point_sample<P: Real>(points: &[[P; 3]], k: usize, start: usize) -> Result<SampleResult> {
    let (selected, elapsed, peak_bytes) = instrument(|| fps_indices(points, k, start, Deadline::none()));
    let selected = selected?.expect("no deadline set");
    Ok(SampleResult { selected: Selection::Indices(selected), elapsed, peak_bytes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Recomputes every min-distance from scratch at each step.
    fn oracle(points: &[[f64; 3]], k: usize, start: usize) -> Vec<usize> {
        let mut sel = vec![start];
        while sel.len() < k {
            let mut best: Option<(usize, f64)> = None;
            for i in 0..points.len() {
                if sel.contains(&i) {
                    continue;
                }
                let m = sel.iter().map(|&s| dist2(&points[i], &points[s])).fold(f64::INFINITY, f64::min);
                if best.is_none_or(|(_, b)| m > b) {
                    best = Some((i, m));
                }
            }
            sel.push(best.unwrap().0);
        }
        sel
    }

    #[test]
    fn line_example() {
        let pts: Vec<[f64; 3]> = [0.0, 1.0, 2.0, 10.0].iter().map(|&x| [x, 0.0, 0.0]).collect();
        assert_eq!(farthest_point_sample(&pts, 2, 0).unwrap().indices(), &[0, 3]);
        assert_eq!(farthest_point_sample(&pts, 4, 0).unwrap().indices(), &[0, 3, 2, 1]);
        assert_eq!(farthest_point_sample(&pts, 1, 2).unwrap().indices(), &[2]);
    }

    #[test]
    fn matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let pts: Vec<[f64; 3]> = (0..300).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
            let start = rng.random_range(0..300);
            let got = farthest_point_sample(&pts, 40, start).unwrap();
            assert_eq!(got.indices(), oracle(&pts, 40, start).as_slice());
        }
    }

    #[test]
    fn coincident_points_fill_by_index() {
        let pts = vec![[1.0, 1.0, 1.0]; 5];
        assert_eq!(farthest_point_sample(&pts, 5, 3).unwrap().indices(), &[3, 0, 1, 2, 4]);
    }

    #[test]
    fn argument_errors() {
        let pts = vec![[0.0f64; 3]; 3];
        assert!(farthest_point_sample(&pts, 4, 0).is_err());
        assert!(farthest_point_sample(&pts, 1, 3).is_err());
        assert!(farthest_point_sample(&pts, 0, 0).is_err());
    }

    #[test]
    fn deadline_aborts() {
        let pts: Vec<[f32; 3]> = (0..5000).map(|i| [i as f32, 0.0, 0.0]).collect();
        let past = Deadline::at(std::time::Instant::now());
        assert_eq!(fps_indices(&pts, 4000, 0, past).unwrap(), None);
    }
}
