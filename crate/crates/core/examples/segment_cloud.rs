//! Segments a PLY or KITTI cloud with a saved checkpoint and, when the cloud
//! carries labels, reports the confusion matrix.
//!
//! cargo run --release --example segment_cloud -- <checkpoint> <cloud.ply|scan.bin>

use std::fs;
use std::path::Path;

use randla::cli::load_cloud;
use randla::network::{Network, NetworkInput, SegmentationMetrics};

fn main() -> randla::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [checkpoint, cloud] = args.as_slice() else {
        eprintln!("usage: segment_cloud <checkpoint> <cloud>");
        std::process::exit(64);
    };
    let net = Network::from_checkpoint(&fs::read(checkpoint)?)?;
    let cloud = load_cloud(Path::new(cloud))?;
    let pred = net.predict(&NetworkInput::from_cloud(&cloud)?)?;

    let mut counts = vec![0usize; net.config.n_class];
    for &p in &pred {
        counts[p as usize] += 1;
    }
    println!("{} points, predicted class counts {counts:?}", pred.len());
    if cloud.check_labels(net.config.n_class).is_err() {
        println!("labels missing or outside the checkpoint's {} classes; not scoring", net.config.n_class);
    } else if let Some(truth) = cloud.labels() {
        let m = SegmentationMetrics::compute(truth, &pred, net.config.n_class)?;
        println!("mIoU {:.4}  OA {:.4}  mAcc {:.4}", m.miou, m.oa, m.macc);
        for row in &m.confusion {
            println!("  {row:?}");
        }
    }
    Ok(())
}
