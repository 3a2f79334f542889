use crate::sampling::random_sample;
use crate::spatial::nearest_one;
use crate::tensor::{Activation, Graph, Linear, Var};
use crate::{Error, Result};

/// Number of points kept when decimating `n` points at `ratio` (rounded up).
pub fn decimated_count(n: usize, ratio: f64) -> usize {
    (n as f64 * ratio).ceil() as usize
}

/// Result of a random decimation layer.
#[derive(Debug, Clone)]
pub struct Downsampled {
    pub positions: Vec<[f64; 3]>,
    pub features: Var,
    /// Rows of the input that were kept, in ascending order.
    pub kept: Vec<usize>,
}

/// Keeps `ceil(N·ratio)` uniformly chosen points; feature rows follow.
pub fn downsample_layer(
    g: &mut Graph,
    positions: &[[f64; 3]],
    features: Var,
    ratio: f64,
    seed: u64,
) -> Result<Downsampled> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Argument(format!("decimation ratio must lie in (0, 1), got {ratio}")));
    }
    let n = positions.len();
    if g.shape(features).first() != Some(&n) {
        return Err(Error::Shape(format!("{n} positions but features of shape {:?}", g.shape(features))));
    }
    let m = decimated_count(n, ratio);
    if m == 0 {
        return Err(Error::Argument(format!("decimating {n} points at {ratio} leaves none")));
    }
    let mut kept = random_sample(n, m, seed)?.indices().to_vec();
    kept.sort_unstable();
    let features = g.gather_rows(features, &kept, &[m])?;
    let positions = kept.iter().map(|&i| positions[i]).collect();
    Ok(Downsampled { positions, features, kept })
}

/// Copies each fine point's nearest coarse feature, appends the skip feature
/// and applies `mlp` with leaky ReLU.
pub fn upsample_layer(
    g: &mut Graph,
    coarse_positions: &[[f64; 3]],
    coarse_features: Var,
    fine_positions: &[[f64; 3]],
    skip: Var,
    mlp: &Linear,
) -> Result<Var> {
    let up = interpolate_nearest(g, coarse_positions, coarse_features, fine_positions)?;
    if g.shape(skip).first() != Some(&fine_positions.len()) {
        return Err(Error::Shape(format!(
            "{} fine points but skip features of shape {:?}",
            fine_positions.len(),
            g.shape(skip)
        )));
    }
    let joined = g.concat(&[up, skip])?;
    g.shared_mlp(joined, mlp, Activation::leaky())
}

/// Nearest-neighbour interpolation of coarse features onto fine points.
pub fn interpolate_nearest(
    g: &mut Graph,
    coarse_positions: &[[f64; 3]],
    coarse_features: Var,
    fine_positions: &[[f64; 3]],
) -> Result<Var> {
    if g.shape(coarse_features).first() != Some(&coarse_positions.len()) {
        return Err(Error::Shape(format!(
            "{} coarse points but features of shape {:?}",
            coarse_positions.len(),
            g.shape(coarse_features)
        )));
    }
    let nn = nearest_one(coarse_positions, fine_positions)?;
    g.gather_rows(coarse_features, nn.indices(), &[fine_positions.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{MlpParams, ParamStore, Tensor};

    fn line(n: usize) -> (Vec<[f64; 3]>, Tensor) {
        let pos = (0..n).map(|i| [i as f64, 0.0, 0.0]).collect();
        let f = Tensor::new(vec![n, 2], (0..2 * n).map(|v| v as f64).collect()).unwrap();
        (pos, f)
    }

    #[test]
    fn counts_round_up() {
        assert_eq!(decimated_count(1024, 0.25), 256);
        assert_eq!(decimated_count(5, 0.25), 2);
        let (pos, f) = line(5);
        let mut g = Graph::new();
        let f = g.constant(f);
        let d = downsample_layer(&mut g, &pos, f, 0.25, 3).unwrap();
        assert_eq!(d.kept.len(), 2);
        for (r, &i) in d.kept.iter().enumerate() {
            assert_eq!(d.positions[r], pos[i]);
            assert_eq!(g.value(d.features).row(r), g.value(f).row(i));
        }
        assert!(downsample_layer(&mut g, &pos, f, 1.0, 3).is_err());
        assert!(downsample_layer(&mut g, &pos, f, 0.0, 3).is_err());
    }

    #[test]
    fn identity_and_constant_upsampling() {
        let (pos, f) = line(6);
        let mut g = Graph::new();
        let fv = g.constant(f.clone());
        let up = interpolate_nearest(&mut g, &pos, fv, &pos).unwrap();
        assert_eq!(g.value(up).data(), f.data());

        let one = g.constant(Tensor::new(vec![1, 2], vec![7.0, -1.0]).unwrap());
        let up = interpolate_nearest(&mut g, &[[2.0, 2.0, 2.0]], one, &pos).unwrap();
        assert!(g.value(up).data().chunks(2).all(|r| r == [7.0, -1.0]));

        let mut store = ParamStore::new();
        let mlp = Linear::register(&mut store, "m", MlpParams::zeros(4, 3));
        let mut g = Graph::with_params(&store);
        let fv = g.constant(f);
        let w = g.param(mlp.weight);
        let y = upsample_layer(&mut g, &pos[..2], w, &pos, fv, &mlp);
        assert!(y.is_err());
        let coarse = g.constant(Tensor::zeros(vec![2, 2]));
        let y = upsample_layer(&mut g, &pos[..2], coarse, &pos, fv, &mlp).unwrap();
        assert_eq!(g.shape(y), &[6, 3]);
    }
}
