//! Exact K-nearest-neighbour search: the grid index against the all-pairs
//! scan on the same cloud.
//!
//! cargo run --example knn -- [n_points] [k]

use std::time::Instant;

use randla::sampling::uniform_cloud;
use randla::spatial::{knn, knn_brute_force};

fn main() -> randla::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let k: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(16);
    let cloud = uniform_cloud(n, 1);

    let t = Instant::now();
    let grid = knn(&cloud, &cloud, k)?;
    let t_grid = t.elapsed();
    let t = Instant::now();
    let brute = knn_brute_force(&cloud, &cloud, k)?;
    let t_brute = t.elapsed();

    println!("{n} points, k = {k}");
    println!("grid        {:>10.3} ms", t_grid.as_secs_f64() * 1e3);
    println!("all pairs   {:>10.3} ms", t_brute.as_secs_f64() * 1e3);
    println!("identical: {}", grid == brute);
    println!("neighbours of point 0: {:?}", grid.row(0));
    println!("distances:             {:.4?}", grid.row_distances(0));
    Ok(())
}
