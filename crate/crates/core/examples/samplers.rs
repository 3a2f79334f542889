//! The four samplers on one cloud: what they keep, how long they take and
//! how much scratch memory they allocate.
//!
//! cargo run --example samplers -- [n_points]

use randla::sampling::{
    crs_sample, farthest_point_sample, inverse_density_sample, random_sample, uniform_cloud, DensityPolarity,
    GumbelNoise, SampleResult, Selection, DEFAULT_DENSITY_NEIGHBORS,
};
use randla::tensor::Tensor;

fn covering_radius(points: &[[f64; 3]], kept: &[[f64; 3]]) -> f64 {
    points
        .iter()
        .map(|p| kept.iter().map(|q| randla::spatial::dist2(p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        .sqrt()
}

fn report(name: &str, points: &[[f64; 3]], r: &SampleResult) {
    let kept: Vec<[f64; 3]> = match &r.selected {
        Selection::Indices(idx) => idx.iter().map(|&i| points[i]).collect(),
        Selection::Soft(t) => t.data().chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    };
    println!(
        "{name:<5} kept {:>5}  {:>9.3} ms  {:>10} bytes  covering radius {:.4}",
        kept.len(),
        r.elapsed.as_secs_f64() * 1e3,
        r.peak_bytes,
        covering_radius(points, &kept)
    );
}

fn main() -> randla::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4000);
    let k = n / 4;
    let points = uniform_cloud(n, 3);

    report("rs", &points, &random_sample(n, k, 0)?);
    report("fps", &points, &farthest_point_sample(&points, k, 0)?);
    report("idis", &points, &inverse_density_sample(&points, k, DEFAULT_DENSITY_NEIGHBORS, DensityPolarity::Literal)?);

    let features = Tensor::new(vec![n, 3], points.iter().flatten().copied().collect())?;
    let scores = vec![1.0 / n as f64; n];
    report("crs", &points, &crs_sample(&features, &scores, k, 1.0, GumbelNoise::Seeded(0))?);
    Ok(())
}
