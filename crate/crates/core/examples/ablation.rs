//! Short training runs of architectural variants on the synthetic task.
//!
//! cargo run --release --example ablation -- [epochs] [variant ...]

use randla::network::{run_toy, Ablation, ToyTask, TrainOptions};

fn main() -> randla::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let mut variants: Vec<Ablation> = args.map(|a| a.parse()).collect::<randla::Result<_>>()?;
    if variants.is_empty() {
        variants = vec![Ablation::Full, Ablation::NoLocSe, Ablation::MaxPool, Ablation::OneUnit];
    }
    let task = ToyTask { train_scenes: 8, test_scenes: 3, ..Default::default() };
    let opts = TrainOptions { epochs, seed: 1, ..Default::default() };
    println!("variant,params,held_out_miou,final_loss");
    for v in variants {
        let config = v.apply(&task.network_config(1));
        let run = run_toy(&task, &config, &opts, |_| {})?;
        let loss = run.report.epochs.last().map_or(f64::NAN, |r| r.loss);
        println!("{v},{},{:.4},{loss:.4}", run.network.parameter_count(), run.held_out.miou);
    }
    Ok(())
}
