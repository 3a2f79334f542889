use std::fmt;
use std::str::FromStr;

use crate::tensor::{Activation, Graph, Linear, Reduce, Var};
use crate::{Error, Result};

/// How a neighbourhood (Q×K×D) is collapsed to one vector per query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Pooling {
    /// Learned per-channel softmax weights over the K neighbours.
    #[default]
    Attentive,
    Max,
    Mean,
    Sum,
}

impl Pooling {
    pub fn name(self) -> &'static str {
        match self {
            Pooling::Attentive => "attentive",
            Pooling::Max => "max",
            Pooling::Mean => "mean",
            Pooling::Sum => "sum",
        }
    }
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Pooling::Attentive, Pooling::Max, Pooling::Mean, Pooling::Sum]
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown pooling `{s}`")))
    }
}

/// Attention scores `s_i^k`: the score MLP applied to every neighbour
/// feature, then a softmax over the K axis independently per channel.
pub fn attention_scores(g: &mut Graph, fhat: Var, score: &Linear) -> Result<Var> {
    let logits = g.shared_mlp(fhat, score, Activation::None)?;
    g.softmax(logits, 1)
}

/// Collapses the K axis of `fhat` without the trailing MLP.
pub fn pool_neighbors(g: &mut Graph, fhat: Var, score: Option<&Linear>, mode: Pooling) -> Result<Var> {
    let s = g.shape(fhat);
    if s.len() != 3 {
        return Err(Error::Shape(format!("pooling expects Q×K×D, got {s:?}")));
    }
    match mode {
        Pooling::Attentive => {
            let score = score.ok_or_else(|| Error::Config("attentive pooling needs a score MLP".into()))?;
            if score.d_in != s[2] || score.d_out != s[2] {
                return Err(Error::Shape(format!(
                    "score MLP {}→{} for features of width {}",
                    score.d_in, score.d_out, s[2]
                )));
            }
            let weights = attention_scores(g, fhat, score)?;
            let weighted = g.mul(fhat, weights)?;
            g.reduce(weighted, 1, Reduce::Sum)
        }
        Pooling::Max => g.reduce(fhat, 1, Reduce::Max),
        Pooling::Mean => g.reduce(fhat, 1, Reduce::Mean),
        Pooling::Sum => g.reduce(fhat, 1, Reduce::Sum),
    }
}

/// Pooling followed by the shared output MLP (leaky ReLU), Q×K×D → Q×D'.
pub fn attentive_pool(g: &mut Graph, fhat: Var, score: Option<&Linear>, post: &Linear, mode: Pooling) -> Result<Var> {
    let pooled = pool_neighbors(g, fhat, score, mode)?;
    g.shared_mlp(pooled, post, Activation::leaky())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{MlpParams, ParamStore, Tensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(q: usize, k: usize, d: usize, seed: u64) -> (ParamStore, Linear, Tensor) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let score = Linear::register_unbiased(&mut store, "score", MlpParams::init(d, d, &mut rng));
        let x = Tensor::new(vec![q, k, d], (0..q * k * d).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        (store, score, x)
    }

    #[test]
    fn zero_scores_reduce_to_mean() {
        let mut store = ParamStore::new();
        let score = Linear::register_unbiased(&mut store, "score", MlpParams::zeros(4, 4));
        let (_, _, x) = setup(3, 5, 4, 1);
        let mut g = Graph::with_params(&store);
        let f = g.constant(x);
        let att = pool_neighbors(&mut g, f, Some(&score), Pooling::Attentive).unwrap();
        let mean = pool_neighbors(&mut g, f, None, Pooling::Mean).unwrap();
        for (a, b) in g.value(att).data().iter().zip(g.value(mean).data()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_neighbour_passes_through() {
        let (store, score, x) = setup(4, 1, 3, 2);
        let mut g = Graph::with_params(&store);
        let f = g.constant(x.clone());
        for mode in [Pooling::Attentive, Pooling::Max, Pooling::Mean, Pooling::Sum] {
            let p = pool_neighbors(&mut g, f, Some(&score), mode).unwrap();
            for (a, b) in g.value(p).data().iter().zip(x.data()) {
                assert!((a - b).abs() <= 1e-15, "{mode}");
            }
        }
    }

    #[test]
    fn scores_are_normalised_per_channel() {
        let (store, score, x) = setup(6, 7, 5, 3);
        let mut g = Graph::with_params(&store);
        let f = g.constant(x);
        let s = attention_scores(&mut g, f, &score).unwrap();
        let v = g.value(s).data();
        for q in 0..6 {
            for c in 0..5 {
                let total: f64 = (0..7).map(|k| v[(q * 7 + k) * 5 + c]).sum();
                assert!((total - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn post_mlp_shape() {
        let (mut store, score, x) = setup(2, 3, 4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let post = Linear::new(&mut store, "post", 4, 6, &mut rng);
        let mut g = Graph::with_params(&store);
        let f = g.constant(x);
        let out = attentive_pool(&mut g, f, Some(&score), &post, Pooling::Attentive).unwrap();
        assert_eq!(g.shape(out), &[2, 6]);
        assert!(attentive_pool(&mut g, f, None, &post, Pooling::Attentive).is_err());
    }
}
