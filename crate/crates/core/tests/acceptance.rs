//! End-to-end acceptance checks. Runs sequentially (timing-sensitive) and
//! prints one PASS/FAIL line per criterion; exits non-zero on any failure.
//!
//! Set `ACCEPTANCE_ONLY=1,4,9` to run a subset.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randla::aggregation::{
    attentive_pool, dilated_residual_block, downsample_layer, relative_position_encoding, upsample_layer,
    neighborhood_tensors, BlockConfig, BlockParams, LocSeConfig, LocSeVariant, Pooling,
};
use randla::network::{
    build_network, run_toy, Ablation, Mode, NetworkConfig, NetworkInput, SegmentationMetrics, ToyRun, ToyTask,
    TrainOptions,
};
use randla::sampling::{
    crs_weights, farthest_point_sample, inverse_density_sample, run_decimation_benchmark, BenchConfig, CellStatus,
    DecimationPlan, DensityPolarity, GumbelNoise, Method,
};
use randla::spatial::knn;
use randla::tensor::gradcheck::{gradient_error, random_contraction};
use randla::tensor::{Activation, Graph, Linear, ParamStore, Reduce, Tensor, Var};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cloud(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn d2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}

// 1. Sampling efficiency.

fn sampling_efficiency() -> Outcome {
    let plan = DecimationPlan { steps: 5, ratio: 0.25 };
    let small = BenchConfig {
        sizes: vec![100_000],
        plan,
        methods: vec![Method::Rs, Method::Fps],
        time_budget: Duration::from_secs(300),
        ..BenchConfig::default()
    };
    let report = run_decimation_benchmark(&small).unwrap();
    let rs = report.row(Method::Rs, 100_000).unwrap();
    let fps = report.row(Method::Fps, 100_000).unwrap();
    let t_rs = rs.elapsed.as_secs_f64();
    let t_fps = fps.elapsed.as_secs_f64();
    let ratio = t_fps / t_rs.max(1e-9);

    // FPS at 10^6 either runs out of a 300 s budget or takes over 50x the
    // 10^5 time; stopping at the smaller of the two bounds decides both.
    let threshold = 50.0 * t_fps;
    let budget = threshold.min(300.0) + 1.0;
    let large = BenchConfig {
        sizes: vec![1_000_000],
        methods: vec![Method::Fps],
        time_budget: Duration::from_secs_f64(budget),
        ..small
    };
    let big = run_decimation_benchmark(&large).unwrap().rows[0].clone();
    let t_big = big.elapsed.as_secs_f64();
    let big_ok = big.status == CellStatus::Timeout || t_big > threshold;
    let pass = rs.status == CellStatus::Ok && fps.status == CellStatus::Ok && t_rs < 0.1 && ratio > 50.0 && big_ok;
    outcome(
        pass,
        format!(
            "RS(1e5) {t_rs:.4}s, FPS(1e5) {t_fps:.2}s, ratio {ratio:.0}; FPS(1e6) {} after {t_big:.1}s (50x = {threshold:.1}s)",
            big.status.as_str()
        ),
    )
}

// 2. Sampler oracles.

/// Greedy max-min selection recomputing each candidate's distance to every
/// selected point.
fn fps_oracle(points: &[[f64; 3]], k: usize) -> Vec<usize> {
    let mut selected = vec![0usize];
    let mut taken = vec![false; points.len()];
    taken[0] = true;
    while selected.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (i, p) in points.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let m = selected.iter().map(|&s| d2(p, &points[s])).fold(f64::INFINITY, f64::min);
            if m > best.1 {
                best = (i, m);
            }
        }
        taken[best.0] = true;
        selected.push(best.0);
    }
    selected
}

/// Density by sorting all distances to the other points; ranking by a full sort.
fn idis_oracle(points: &[[f64; 3]], k: usize, t: usize, polarity: DensityPolarity) -> Vec<usize> {
    let rho: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut d: Vec<f64> =
                points.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| d2(p, q).sqrt()).collect();
            d.sort_by(f64::total_cmp);
            d[..t].iter().sum()
        })
        .collect();
    let key = |i: usize| match polarity {
        DensityPolarity::Literal => 1.0 / rho[i],
        DensityPolarity::Inverted => rho[i],
    };
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    order.truncate(k);
    order
}

fn sampler_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut fps_bad, mut idis_bad) = (0, 0);
    for case in 0..100 {
        let n = rng.random_range(20..=1000);
        let pts = cloud(n, &mut rng);
        let k = n.div_ceil(4);
        if farthest_point_sample(&pts, k, 0).unwrap().indices() != fps_oracle(&pts, k) {
            fps_bad += 1;
        }
        let t = 16.min(n - 1);
        let polarity = if case % 2 == 0 { DensityPolarity::Literal } else { DensityPolarity::Inverted };
        if inverse_density_sample(&pts, k, t, polarity).unwrap().indices() != idis_oracle(&pts, k, t, polarity) {
            idis_bad += 1;
        }
    }
    outcome(fps_bad == 0 && idis_bad == 0, format!("100 clouds: FPS mismatches {fps_bad}, IDIS mismatches {idis_bad}"))
}

// 3. Relaxed sampling.

fn crs_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_sum, mut non_monotone) = (0.0f64, 0);
    let mut last_mass = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..200);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let scores: Vec<f64> = raw.iter().map(|s| s / total).collect();
        let argmax = (0..n).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for tau in [1.0, 0.1, 0.01] {
            let w = crs_weights(&scores, 3, tau, GumbelNoise::Off).unwrap();
            for row in w.chunks_exact(n) {
                worst_sum = worst_sum.max((row.iter().sum::<f64>() - 1.0).abs());
            }
            let mass = w[argmax];
            if mass < prev {
                non_monotone += 1;
            }
            prev = mass;
        }
        last_mass = prev;
    }
    outcome(
        worst_sum < 1e-9 && non_monotone == 0,
        format!("max |sum - 1| {worst_sum:.2e}, non-monotone cases {non_monotone}, last argmax weight at tau=0.01 {last_mass:.4}"),
    )
}

// 4. Gradients.

type Case = (&'static str, ParamStore, Vec<Tensor>, Box<dyn Fn(&mut Graph, &[Var]) -> randla::Result<Var>>);

fn op_cases(rng: &mut ChaCha8Rng) -> Vec<Case> {
    let none = ParamStore::new;
    let idx: Vec<usize> = (0..12).map(|_| rng.random_range(0..5)).collect();
    let labels: Vec<u32> = (0..6).map(|_| rng.random_range(0..4)).collect();
    let labels2 = labels.clone();
    let pos = cloud(10, rng);
    let nn = knn(&pos, &pos, 4).unwrap();
    let (center, neigh) = neighborhood_tensors(&pos, &nn).unwrap();
    let mut locse_store = ParamStore::new();
    let locse_mlp = Linear::new(&mut locse_store, "locse", 10, 5, rng);
    let mut pool_store = ParamStore::new();
    let score = Linear::register_unbiased(&mut pool_store, "score", randla::tensor::MlpParams::init(6, 6, rng));
    let post = Linear::new(&mut pool_store, "post", 6, 4, rng);
    let mut up_store = ParamStore::new();
    let up_mlp = Linear::new(&mut up_store, "up", 5, 3, rng);
    let coarse = cloud(4, rng);
    let fine = cloud(9, rng);
    let fine2 = fine.clone();
    let down_pos = cloud(12, rng);
    vec![
        (
            "linear+bias+leaky",
            none(),
            vec![random_tensor(&[5, 3], rng), random_tensor(&[3, 4], rng), random_tensor(&[4], rng)],
            Box::new(|g, v| {
                let y = g.linear(v[0], v[1], Some(v[2]), Activation::leaky())?;
                random_contraction(g, y, 1)
            }),
        ),
        (
            "linear 3-d no bias",
            none(),
            vec![random_tensor(&[2, 3, 4], rng), random_tensor(&[4, 2], rng)],
            Box::new(|g, v| {
                let y = g.linear(v[0], v[1], None, Activation::None)?;
                random_contraction(g, y, 2)
            }),
        ),
        (
            "leaky_relu",
            none(),
            vec![random_tensor(&[4, 5], rng)],
            Box::new(|g, v| {
                let y = g.leaky_relu(v[0], 0.2);
                random_contraction(g, y, 3)
            }),
        ),
        (
            "add/mul/scale",
            none(),
            vec![random_tensor(&[3, 4], rng), random_tensor(&[3, 4], rng)],
            Box::new(|g, v| {
                let m = g.mul(v[0], v[1])?;
                let a = g.add(m, v[1])?;
                let s = g.scale(a, -1.7);
                random_contraction(g, s, 4)
            }),
        ),
        (
            "concat",
            none(),
            vec![random_tensor(&[2, 3, 2], rng), random_tensor(&[2, 3, 5], rng)],
            Box::new(|g, v| {
                let c = g.concat(&[v[0], v[1]])?;
                random_contraction(g, c, 5)
            }),
        ),
        (
            "gather with repeats",
            none(),
            vec![random_tensor(&[5, 3], rng)],
            Box::new(move |g, v| {
                let y = g.gather_rows(v[0], &idx, &[4, 3])?;
                random_contraction(g, y, 6)
            }),
        ),
        (
            "softmax middle axis",
            none(),
            vec![random_tensor(&[3, 5, 2], rng)],
            Box::new(|g, v| {
                let y = g.softmax(v[0], 1)?;
                random_contraction(g, y, 7)
            }),
        ),
        (
            "softmax last axis",
            none(),
            vec![random_tensor(&[4, 6], rng)],
            Box::new(|g, v| {
                let y = g.softmax_lastaxis(v[0])?;
                random_contraction(g, y, 8)
            }),
        ),
        (
            "reduce sum/mean/max",
            none(),
            vec![random_tensor(&[3, 4, 2], rng)],
            Box::new(|g, v| {
                let a = g.reduce(v[0], 1, Reduce::Sum)?;
                let b = g.reduce(v[0], 1, Reduce::Mean)?;
                let c = g.reduce(v[0], 1, Reduce::Max)?;
                let ab = g.concat(&[a, b, c])?;
                random_contraction(g, ab, 9)
            }),
        ),
        (
            "dropout (fixed mask)",
            none(),
            vec![random_tensor(&[6, 4], rng)],
            Box::new(|g, v| {
                let y = g.dropout(v[0], 0.5, true, 77)?;
                random_contraction(g, y, 10)
            }),
        ),
        (
            "cross entropy",
            none(),
            vec![random_tensor(&[6, 4], rng)],
            Box::new(move |g, v| g.softmax_cross_entropy(v[0], &labels, None)),
        ),
        (
            "weighted cross entropy",
            none(),
            vec![random_tensor(&[6, 4], rng)],
            Box::new(move |g, v| g.softmax_cross_entropy(v[0], &labels2, Some(&[0.5, 2.0, 1.0, 1.5]))),
        ),
        (
            "relative position encoding",
            locse_store,
            vec![],
            Box::new(move |g, _| {
                let r = relative_position_encoding(g, &center, &neigh, LocSeVariant::Full, &locse_mlp)?;
                random_contraction(g, r, 11)
            }),
        ),
        (
            "attentive pooling",
            pool_store,
            vec![random_tensor(&[5, 4, 6], rng)],
            Box::new(move |g, v| {
                let y = attentive_pool(g, v[0], Some(&score), &post, Pooling::Attentive)?;
                random_contraction(g, y, 12)
            }),
        ),
        (
            "upsample",
            up_store,
            vec![random_tensor(&[4, 3], rng), random_tensor(&[9, 2], rng)],
            Box::new(move |g, v| {
                let y = upsample_layer(g, &coarse, v[0], &fine2, v[1], &up_mlp)?;
                random_contraction(g, y, 13)
            }),
        ),
        (
            "downsample",
            none(),
            vec![random_tensor(&[12, 3], rng)],
            Box::new(move |g, v| {
                let d = downsample_layer(g, &down_pos, v[0], 0.25, 5)?;
                random_contraction(g, d.features, 14)
            }),
        ),
    ]
}

fn gradient_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut worst_op = 0.0f64;
    for (name, store, inputs, build) in op_cases(&mut rng) {
        let err = gradient_error(&store, &inputs, 1e-6, |g, v| build(g, v)).unwrap();
        worst_op = worst_op.max(err);
        if !(err < 1e-5) {
            failures.push(format!("{name} {err:.2e}"));
        }
    }
    let mut worst_block = 0.0f64;
    for (units, pooling) in [(1, Pooling::Attentive), (2, Pooling::Attentive), (2, Pooling::Max), (3, Pooling::Mean)] {
        let pos = cloud(32, &mut rng);
        let nn = knn(&pos, &pos, 4).unwrap();
        let mut store = ParamStore::new();
        let cfg = BlockConfig { units, pooling, locse: LocSeConfig { k: 4, ..Default::default() }, d_out: 4 };
        let p = BlockParams::new(&mut store, "b", 3, cfg, &mut rng).unwrap();
        let feats = random_tensor(&[32, 3], &mut rng);
        let err = gradient_error(&store, &[feats], 1e-6, |g, v| {
            let y = dilated_residual_block(g, &pos, v[0], &nn, &p)?;
            random_contraction(g, y, 15)
        })
        .unwrap();
        worst_block = worst_block.max(err);
        if !(err < 1e-4) {
            failures.push(format!("block units={units} {pooling} {err:.2e}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("worst op error {worst_op:.2e} (< 1e-5), worst block error {worst_block:.2e} (< 1e-4); failures: {failures:?}"),
    )
}

// 5. Receptive field.

fn hops(nn: &randla::spatial::NeighborIndex, q: usize, depth: usize) -> BTreeSet<usize> {
    let mut set = BTreeSet::from([q]);
    let mut frontier = vec![q];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &p in &frontier {
            for &j in nn.row(p) {
                if set.insert(j) {
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    set
}

fn receptive_field() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 64;
    let pos = cloud(n, &mut rng);
    let nn = knn(&pos, &pos, 4).unwrap();
    let feats = random_tensor(&[n, 3], &mut rng);
    let mut report = Vec::new();
    let mut pass = true;
    for units in [1usize, 2] {
        let mut store = ParamStore::new();
        let cfg = BlockConfig { units, locse: LocSeConfig { k: 4, ..Default::default() }, d_out: 8, ..Default::default() };
        let p = BlockParams::new(&mut store, "b", 3, cfg, &mut rng).unwrap();
        let eval = |pos: &[[f64; 3]], f: &Tensor| -> Tensor {
            let mut g = Graph::with_params(&store);
            let x = g.constant(f.clone());
            let y = dilated_residual_block(&mut g, pos, x, &nn, &p).unwrap();
            g.value(y).clone()
        };
        let base = eval(&pos, &feats);
        let reach: Vec<BTreeSet<usize>> = (0..n).map(|q| hops(&nn, q, units)).collect();
        let (mut leaks, mut inside_changes, mut inside_total) = (0usize, 0usize, 0usize);
        for j in 0..n {
            let mut f = feats.clone();
            for v in &mut f.data_mut()[j * 3..(j + 1) * 3] {
                *v += 0.5;
            }
            let mut moved = pos.clone();
            moved[j][0] += 0.05;
            moved[j][2] -= 0.03;
            let out = eval(&moved, &f);
            for q in 0..n {
                let changed = base.row(q) != out.row(q);
                if reach[q].contains(&j) {
                    inside_total += 1;
                    inside_changes += usize::from(changed);
                } else if changed {
                    leaks += 1;
                }
            }
        }
        pass &= leaks == 0 && inside_changes > 0;
        report.push(format!("units={units}: {leaks} changes outside the {units}-hop set, {inside_changes}/{inside_total} inside"));
    }
    outcome(pass, report.join("; "))
}

// 6. Cascade.

fn cascade() -> Outcome {
    let cfg = NetworkConfig::new(3, 5);
    let net = build_network(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pos = cloud(1024, &mut rng);
    let feats = Tensor::new(vec![1024, 3], pos.iter().flatten().copied().collect()).unwrap();
    let input = NetworkInput { positions: pos, features: feats, neighbors: None };
    let (train_logits, train) = net.forward(&input, Mode::Train, 11).unwrap();
    let (infer_logits, infer) = net.forward(&input, Mode::Infer, 11).unwrap();
    let (infer_again, _) = net.forward(&input, Mode::Infer, 99).unwrap();
    let widths_ok = infer.input_width == 8 && infer.encoder_widths == [32, 128, 256, 512];
    let points_ok = infer.encoder_points == [256, 64, 16, 4];
    let decoder_ok = infer.decoder_shapes.last().map(|s| s.0) == Some(1024);
    let head_ok = infer.head_shapes == [(1024, 64), (1024, 32), (1024, 5)];
    let dropout_ok = train.dropout_active
        && !infer.dropout_active
        && cfg.dropout == 0.5
        && infer_logits == infer_again
        && train_logits != infer_logits;
    outcome(
        widths_ok && points_ok && decoder_ok && head_ok && dropout_ok,
        format!(
            "points {:?}, widths {}->{:?}, decoder {:?}, head {:?}, dropout train={} infer={}",
            infer.encoder_points,
            infer.input_width,
            infer.encoder_widths,
            infer.decoder_shapes,
            infer.head_shapes,
            train.dropout_active,
            infer.dropout_active
        ),
    )
}

// 7 and 8. Toy learning and ablation direction.

const TOY_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn toy_run(ablation: Ablation, seed: u64) -> ToyRun {
    let task = ToyTask::default();
    let config = ablation.apply(&task.network_config(seed));
    let opts = TrainOptions { epochs: 50, seed, ..Default::default() };
    run_toy(&task, &config, &opts, |_| {}).unwrap()
}

fn toy_learning(full: &mut Vec<f64>) -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for seed in TOY_SEEDS {
        let t = Instant::now();
        let run = toy_run(Ablation::Full, seed);
        full.push(run.held_out.miou);
        lines.push(format!("seed {seed}: {:.3} ({:.0}s)", run.held_out.miou, t.elapsed().as_secs_f64()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let good = full.iter().filter(|&&m| m >= 0.85).count();
    outcome(good >= 4 && elapsed < 900.0, format!("held-out mIoU {}; {good}/5 >= 0.85 in {elapsed:.0}s", lines.join(", ")))
}

fn ablation_direction(full: &[f64]) -> Outcome {
    let mut wins = 0;
    let mut lines = Vec::new();
    for (i, seed) in TOY_SEEDS.into_iter().enumerate() {
        let no_locse = toy_run(Ablation::NoLocSe, seed).held_out.miou;
        let one_unit = toy_run(Ablation::OneUnit, seed).held_out.miou;
        let win = full[i] >= no_locse && full[i] >= one_unit;
        wins += usize::from(win);
        lines.push(format!("seed {seed}: full {:.3} no_locse {no_locse:.3} one_unit {one_unit:.3}", full[i]));
    }
    outcome(wins >= 3, format!("full best in {wins}/5 seeds; {}", lines.join("; ")))
}

// 9. Metrics.

fn metrics_recount() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let c = rng.random_range(1..10usize);
        let n = rng.random_range(1..300usize);
        let truth: Vec<u32> = (0..n).map(|_| rng.random_range(0..c as u32)).collect();
        let pred: Vec<u32> = (0..n).map(|_| rng.random_range(0..c as u32)).collect();
        let m = SegmentationMetrics::compute(&truth, &pred, c).unwrap();
        let (mut iou_sum, mut acc_sum, mut present, mut correct) = (0.0, 0.0, 0u32, 0usize);
        let mut ok = true;
        for k in 0..c as u32 {
            let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
            for (&t, &p) in truth.iter().zip(&pred) {
                match (t == k, p == k) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
            }
            let union = tp + fp + fn_;
            let iou = tp as f64 / union as f64;
            let reported = m.per_class_iou[k as usize];
            ok &= if union == 0 { reported.is_nan() } else { reported == iou };
            if tp + fn_ > 0 {
                present += 1;
                iou_sum += iou;
                acc_sum += tp as f64 / (tp + fn_) as f64;
            }
            correct += tp;
            for p in 0..c as u32 {
                let count = truth.iter().zip(&pred).filter(|&(&a, &b)| a == k && b == p).count() as u64;
                ok &= m.confusion[k as usize][p as usize] == count;
            }
        }
        ok &= m.miou == iou_sum / present as f64;
        ok &= m.macc == acc_sum / present as f64;
        ok &= m.oa == correct as f64 / n as f64;
        mismatches += usize::from(!ok);
    }
    outcome(mismatches == 0, format!("1000 random pairs, {mismatches} mismatches"))
}

fn main() {
    let only: Option<BTreeSet<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wanted = |i: usize| only.as_ref().is_none_or(|s| s.contains(&i));
    let mut failed = Vec::new();
    let mut report = |i: usize, name: &str, soft: bool, run: &mut dyn FnMut() -> Outcome| {
        if !wanted(i) {
            return;
        }
        let start = Instant::now();
        let o = run();
        let verdict = match (o.pass, soft) {
            (true, _) => "PASS",
            (false, true) => "WARN",
            (false, false) => "FAIL",
        };
        println!("[{verdict}] {i}. {name}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass && !soft {
            failed.push(i);
        }
    };
    let mut full = Vec::new();
    report(1, "sampling efficiency", false, &mut sampling_efficiency);
    report(2, "sampler oracle equivalence", false, &mut sampler_oracles);
    report(3, "relaxed sampling fidelity", false, &mut crs_fidelity);
    report(4, "gradient suite", false, &mut gradient_suite);
    report(5, "receptive field", false, &mut receptive_field);
    report(6, "architecture cascade", false, &mut cascade);
    report(7, "toy end-to-end learning", false, &mut || toy_learning(&mut full));
    if wanted(8) && full.len() < TOY_SEEDS.len() {
        full = TOY_SEEDS.iter().map(|&s| toy_run(Ablation::Full, s).held_out.miou).collect();
    }
    report(8, "ablation direction (soft)", true, &mut || ablation_direction(&full));
    report(9, "metrics recount", false, &mut metrics_recount);
    if !failed.is_empty() {
        println!("acceptance failed: criteria {failed:?}");
        std::process::exit(1);
    }
}
