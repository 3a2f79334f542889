use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randla::sampling::{
    crs_sample, crs_weights, density, farthest_point_sample, inverse_density_sample, random_sample, DensityPolarity,
    GumbelNoise, Selection,
};
use randla::tensor::Tensor;

fn d2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}

fn uniform(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
}

fn min_dist_to(points: &[[f64; 3]], i: usize, set: &[usize]) -> f64 {
    set.iter().map(|&s| d2(&points[i], &points[s])).fold(f64::INFINITY, f64::min)
}

fn covering_radius(points: &[[f64; 3]], samples: &[usize]) -> f64 {
    (0..points.len()).map(|i| min_dist_to(points, i, samples)).fold(0.0, f64::max).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fps_prefixes_are_max_min(n in 2usize..300, seed in any::<u64>(), start in any::<prop::sample::Index>()) {
        let pts = uniform(n, seed);
        let start = start.index(n);
        let k = n.min(60);
        let sel = farthest_point_sample(&pts, k, start).unwrap().indices().to_vec();
        prop_assert_eq!(sel[0], start);
        for m in 2..=k {
            let prefix = &sel[..m - 1];
            let chosen = min_dist_to(&pts, sel[m - 1], prefix);
            for i in 0..n {
                if !sel[..m].contains(&i) {
                    prop_assert!(min_dist_to(&pts, i, prefix) <= chosen);
                }
            }
        }
    }

    #[test]
    fn idis_is_rank_then_take(n in 2usize..2000, seed in any::<u64>(), t in 1usize..24, frac in 0.01f64..1.0, inverted: bool) {
        let pts = uniform(n, seed);
        let t = t.min(n - 1);
        let k = ((n as f64 * frac).ceil() as usize).clamp(1, n);
        let polarity = if inverted { DensityPolarity::Inverted } else { DensityPolarity::Literal };
        let rho = density(&pts, t).unwrap();
        for (i, p) in pts.iter().enumerate().step_by(97) {
            let mut d: Vec<f64> = pts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| d2(p, q).sqrt()).collect();
            d.sort_by(f64::total_cmp);
            let want: f64 = d[..t].iter().sum();
            prop_assert!((rho[i] - want).abs() <= 1e-12 * want.max(1.0));
        }
        let key = |i: usize| if inverted { rho[i] } else { 1.0 / rho[i] };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
        let got = inverse_density_sample(&pts, k, t, polarity).unwrap();
        prop_assert_eq!(got.indices(), &order[..k]);
    }

    #[test]
    fn crs_rows_are_distributions_sharpening_towards_argmax(
        raw in prop::collection::vec(0.001f64..1.0, 2..100),
        seed in any::<u64>(),
    ) {
        let total: f64 = raw.iter().sum();
        let scores: Vec<f64> = raw.iter().map(|s| s / total).collect();
        let n = scores.len();
        let best = (0..n).max_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a))).unwrap();
        let mut prev_gap = f64::INFINITY;
        for tau in [1.0, 0.1, 0.01] {
            let w = crs_weights(&scores, 2, tau, GumbelNoise::Off).unwrap();
            prop_assert!((w[..n].iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let gap: f64 = w[..n].iter().enumerate().map(|(i, &v)| (v - f64::from(u8::from(i == best))).abs()).sum();
            prop_assert!(gap <= prev_gap + 1e-15);
            prev_gap = gap;
            let noisy = crs_weights(&scores, 3, tau, GumbelNoise::Seeded(seed)).unwrap();
            for row in noisy.chunks_exact(n) {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn fps_covers_better_than_random() {
    let mut wins = 0;
    for seed in 0..100 {
        let pts = uniform(1000, seed);
        let fps = farthest_point_sample(&pts, 50, 0).unwrap();
        let rs = random_sample(1000, 50, seed + 1000).unwrap();
        if covering_radius(&pts, fps.indices()) <= covering_radius(&pts, rs.indices()) {
            wins += 1;
        }
    }
    assert!(wins >= 95, "FPS covered at least as well in {wins}/100 seeds");
}

#[test]
fn random_sampling_is_uniform() {
    let (n, k, trials) = (100, 25, 10_000);
    let mut hits = vec![0u32; n];
    for seed in 0..trials {
        for &i in random_sample(n, k, seed).unwrap().indices() {
            hits[i] += 1;
        }
    }
    for (i, &h) in hits.iter().enumerate() {
        let f = f64::from(h) / trials as f64;
        assert!((f - 0.25).abs() < 0.02, "index {i} drawn with frequency {f}");
    }
}

#[test]
fn random_sampling_cost_does_not_grow_with_cloud_size() {
    let best = |n: usize| {
        (0..20).map(|s| random_sample(n, 1000, s).unwrap().elapsed.as_secs_f64()).fold(f64::INFINITY, f64::min)
    };
    let small = best(10_000);
    let large = best(1_000_000);
    assert!(large / small.max(1e-9) < 20.0, "10^4: {small}s, 10^6: {large}s");
}

#[test]
fn crs_soft_points_are_convex_combinations() {
    let n = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let feats = Tensor::new(vec![n, 4], (0..n * 4).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let scores = vec![1.0 / n as f64; n];
    let r = crs_sample(&feats, &scores, 7, 0.5, GumbelNoise::Seeded(1)).unwrap();
    let Selection::Soft(soft) = &r.selected else { panic!("expected soft points") };
    assert_eq!(soft.shape(), &[7, 4]);
    for c in 0..4 {
        let col: Vec<f64> = (0..n).map(|i| feats.row(i)[c]).collect();
        let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        for j in 0..7 {
            assert!(soft.row(j)[c] >= lo - 1e-12 && soft.row(j)[c] <= hi + 1e-12);
        }
    }
}
