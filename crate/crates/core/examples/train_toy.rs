//! Trains the desk-scale network on synthetic three-class scenes, scores the
//! held-out scenes and saves a checkpoint.
//!
//! cargo run --release --example train_toy -- [epochs] [seed] [checkpoint]

use std::fs;
use std::time::Instant;

use randla::network::{run_toy, ToyTask, TrainOptions};

fn main() -> randla::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let checkpoint = args.next();

    let task = ToyTask::default();
    let config = task.network_config(seed);
    println!("{} training scenes of {} points, {} held out", task.train_scenes, task.n_points, task.test_scenes);
    let start = Instant::now();
    let opts = TrainOptions { epochs, seed, ..Default::default() };
    let run = run_toy(&task, &config, &opts, |r| {
        println!("epoch {:>3}  loss {:.4}  lr {:.5}  train mIoU {:.3}", r.epoch, r.loss, r.lr, r.miou)
    })?;
    println!(
        "held out: mIoU {:.4}  OA {:.4}  per class {:.3?}  ({} parameters, {:.0} s)",
        run.held_out.miou,
        run.held_out.oa,
        run.held_out.per_class_iou,
        run.network.parameter_count(),
        start.elapsed().as_secs_f64()
    );
    if let Some(path) = checkpoint {
        fs::write(&path, run.network.to_checkpoint())?;
        println!("saved {path}");
    }
    Ok(())
}
