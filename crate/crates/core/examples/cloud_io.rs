//! Generates a labelled synthetic scene, writes it as ASCII PLY and as a
//! KITTI scan, and reads both back.
//!
//! cargo run --example cloud_io -- [out_dir]

use std::fs;
use std::path::PathBuf;

use randla::cloud::{
    generate_scene, parse_kitti_bin, parse_kitti_labels, parse_ply, serialize_kitti_bin, serialize_kitti_labels,
    serialize_ply, SceneSpec,
};

fn main() -> randla::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    fs::create_dir_all(&dir)?;

    let scene = generate_scene(&SceneSpec::new(2000, 4, 7))?;
    let labels = scene.labels().unwrap_or_default();
    let mut counts = [0usize; 4];
    for &l in labels {
        counts[l as usize] += 1;
    }
    println!("scene: {} points, per-class counts {counts:?}", scene.len());

    let ply = dir.join("scene.ply");
    fs::write(&ply, serialize_ply(&scene))?;
    let back = parse_ply(&fs::read(&ply)?)?;
    println!("{}: {} points, labels kept: {}", ply.display(), back.len(), back.labels() == scene.labels());

    let bin = dir.join("scene.bin");
    let label = dir.join("scene.label");
    fs::write(&bin, serialize_kitti_bin(&scene))?;
    fs::write(&label, serialize_kitti_labels(labels))?;
    let scan = parse_kitti_bin(&fs::read(&bin)?)?.with_labels(parse_kitti_labels(&fs::read(&label)?)?)?;
    let max_err = scan
        .positions()
        .iter()
        .zip(scene.positions())
        .flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]).abs()))
        .fold(0.0, f64::max);
    println!("{}: {} points, largest f32 rounding error {max_err:.2e}", bin.display(), scan.len());
    Ok(())
}
