//! One dilated residual block on a small cloud: output widths for each
//! pooling mode and the growth of the receptive field with stacked units.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randla::aggregation::{dilated_residual_block, BlockConfig, BlockParams, LocSeConfig, Pooling};
use randla::sampling::uniform_cloud;
use randla::spatial::knn;
use randla::tensor::{Graph, ParamStore, Tensor};

fn main() -> randla::Result<()> {
    let n = 256;
    let k = 8;
    let positions = uniform_cloud(n, 5);
    let neighbours = knn(&positions, &positions, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let features = Tensor::new(vec![n, 6], (0..n * 6).map(|_| rng.random_range(-1.0..1.0)).collect())?;

    for pooling in [Pooling::Attentive, Pooling::Max, Pooling::Mean, Pooling::Sum] {
        let mut store = ParamStore::new();
        let cfg = BlockConfig { pooling, locse: LocSeConfig { k, ..Default::default() }, d_out: 16, ..Default::default() };
        let block = BlockParams::new(&mut store, "block", 6, cfg, &mut rng)?;
        let mut g = Graph::with_params(&store);
        let x = g.constant(features.clone());
        let y = dilated_residual_block(&mut g, &positions, x, &neighbours, &block)?;
        println!("{pooling:<9} output {:?}, {} parameters", g.shape(y), store.scalar_count());
    }

    // Points that can influence point 0 after one, two and three units.
    let mut reach = BTreeSet::from([0usize]);
    for units in 1..=3 {
        reach = reach.iter().flat_map(|&q| neighbours.row(q).iter().copied()).chain(reach.iter().copied()).collect();
        println!("{units} unit(s): receptive field of point 0 holds {} points (at most {})", reach.len(), k.pow(units));
    }
    Ok(())
}
