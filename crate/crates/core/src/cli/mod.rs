//! Command-line front end: benchmarks, training, inference, evaluation,
//! ablations and inspection dumps.
//!
//! Every command writes a JSON manifest next to its outputs and returns a
//! process exit code from [`exit`].

mod manifest;

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, CommandFactory, Parser, Subcommand};

pub use manifest::{manifest_path_for, RunManifest};

use crate::aggregation::dump_attention_matrix;
use crate::cloud::{
    generate_scene, parse_kitti_bin, parse_kitti_labels, parse_ply, serialize_kitti_bin, serialize_kitti_labels,
    serialize_ply, PointCloud, SceneSpec,
};
use crate::network::{
    build_network, evaluate, run_toy, train_with, Ablation, Network, NetworkConfig, NetworkInput, Scene, ToyTask,
    TrainOptions,
};
use crate::sampling::{BenchConfig, DecimationPlan, DensityPolarity, Method, Precision};
use crate::{Error, Result};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Some benchmark cells timed out or exceeded the memory budget.
    pub const INCOMPLETE: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const NO_INPUT: i32 = 66;
    pub const SOFTWARE: i32 = 70;
    pub const IO: i32 = 74;
}

#[derive(Debug, Parser)]
#[command(name = "randla", version, about = "Large-scale point cloud semantic segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time repeated decimation with each sampling method.
    Bench(BenchArgs),
    /// Train a network and write a checkpoint plus a per-epoch report.
    Train(TrainArgs),
    /// Predict per-point labels for one cloud.
    Infer(InferArgs),
    /// Score a checkpoint on labelled clouds.
    Eval(EvalArgs),
    /// Train an architectural variant on the synthetic task and append its score.
    Ablate(AblateArgs),
    /// Write the attention-score weight matrices, one CSV per encoder layer.
    DumpAttn(DumpAttnArgs),
    /// Generate a labelled synthetic scene.
    GenScene(GenSceneArgs),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Initial cloud sizes.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub sizes: Vec<usize>,
    /// Comma-separated subset of rs, fps, idis, crs.
    #[arg(long, default_value = "rs,fps,idis,crs")]
    pub methods: String,
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Fraction kept per step.
    #[arg(long, default_value_t = 0.25)]
    pub ratio: f64,
    /// Per-cell wall-clock budget in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub time_budget: f64,
    /// Largest soft-selection weight matrix to allocate, in MiB.
    #[arg(long, default_value_t = 1024)]
    pub memory_budget_mb: usize,
    /// Run on 32-bit coordinates.
    #[arg(long)]
    pub f32: bool,
    #[arg(long, default_value_t = 16)]
    pub idis_neighbors: usize,
    /// Keep sparse points first when ranking by density.
    #[arg(long)]
    pub idis_inverted: bool,
    /// Gumbel-softmax temperature for the soft sampler.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Where labelled scenes come from.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Labelled clouds: PLY with a `label` property, or KITTI `.bin` with a
    /// sibling `.label` file. Without this, synthetic scenes are generated.
    #[arg(long, value_delimiter = ',')]
    pub data: Vec<PathBuf>,
    /// Number of synthetic scenes.
    #[arg(long, default_value_t = 20)]
    pub scenes: usize,
    /// Points per synthetic scene.
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
    /// Classes in the synthetic scenes.
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 0)]
    pub scene_seed: u64,
}

impl DataArgs {
    fn task(&self) -> ToyTask {
        ToyTask {
            n_points: self.points,
            n_class: self.classes,
            train_scenes: self.scenes,
            test_scenes: self.scenes,
            seed: self.scene_seed,
            ..Default::default()
        }
    }

    fn synthetic(&self) -> bool {
        self.data.is_empty()
    }

    /// Loaded clouds, or the synthetic training (`held_out = false`) or
    /// held-out split.
    fn scenes(&self, k: usize, held_out: bool) -> Result<Vec<Scene>> {
        if self.synthetic() {
            let task = self.task();
            return if held_out { task.test_set(k) } else { task.train_set(k) };
        }
        self.data.iter().map(|p| Scene::from_cloud(&load_cloud(p)?)?.with_neighbors(k)).collect()
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Network configuration file (flat `key = value`). Without it, the
    /// desk-scale synthetic-task network is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    /// Seeds training; also the initialisation seed when no config is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// PLY or KITTI `.bin` cloud.
    #[arg(long)]
    pub input: PathBuf,
    /// `.label` writes KITTI labels; anything else writes one label per line.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Metrics as JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// One of full, no_locse, max_pool, mean_pool, sum_pool, one_unit,
    /// three_units, locse_1 … locse_5.
    pub ablation: String,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub scenes: usize,
    #[arg(long, default_value_t = 5)]
    pub test_scenes: usize,
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub scene_seed: u64,
    /// Comparison CSV; one row is appended per run.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DumpAttnArgs {
    /// Trained network; otherwise a fresh one built from `--config`.
    #[arg(long, conflicts_with = "config")]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenSceneArgs {
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Side length of the square floor.
    #[arg(long, default_value_t = 4.0)]
    pub extent: f64,
    /// `.ply` writes ASCII PLY; `.bin` writes a KITTI scan plus `.label`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Exit code for an error escaping a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Config(_) => exit::USAGE,
        Error::Data(_) | Error::Parse { .. } | Error::Format(_) | Error::UnsupportedFormat(_) => exit::DATA,
        Error::Io(_) => exit::IO,
        Error::Diverged { .. } | Error::Optimization { .. } | Error::Shape(_) | Error::Index { .. } => exit::SOFTWARE,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let recorded: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Bench(a) => cmd_bench(a, &recorded),
        Command::Train(a) => cmd_train(a, &recorded),
        Command::Infer(a) => cmd_infer(a, &recorded),
        Command::Eval(a) => cmd_eval(a, &recorded),
        Command::Ablate(a) => cmd_ablate(a, &recorded),
        Command::DumpAttn(a) => cmd_dump_attn(a, &recorded),
        Command::GenScene(a) => cmd_gen_scene(a, &recorded),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

fn usage_error(subcommand: &str, msg: &str) -> i32 {
    let mut cmd = Cli::command();
    let usage = cmd.find_subcommand_mut(subcommand).map(|c| c.render_usage().to_string()).unwrap_or_default();
    eprintln!("error: {msg}\n\n{usage}");
    exit::USAGE
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Reads a PLY file or a KITTI scan (with its `.label` sibling when present).
pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    let bytes = fs::read(path)?;
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("ply") => parse_ply(&bytes),
        Some("bin") => {
            let cloud = parse_kitti_bin(&bytes)?;
            let label_path = path.with_extension("label");
            if label_path.exists() {
                cloud.with_labels(parse_kitti_labels(&fs::read(label_path)?)?)
            } else {
                Ok(cloud)
            }
        }
        _ => Err(Error::UnsupportedFormat(format!("{}: expected a .ply or .bin file", path.display()))),
    }
}

/// Reads a configuration file; any failure maps to [`exit::NO_INPUT`].
fn read_config(path: &Path) -> std::result::Result<NetworkConfig, i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read config {}: {e}", path.display());
        exit::NO_INPUT
    })?;
    NetworkConfig::from_text(&text).map_err(|e| {
        eprintln!("error: invalid config {}: {e}", path.display());
        exit::NO_INPUT
    })
}

fn read_checkpoint_file(path: &Path) -> Result<Network> {
    Network::from_checkpoint(&fs::read(path)?)
}

pub fn cmd_bench(args: &BenchArgs, recorded: &[String]) -> Result<i32> {
    let methods: Result<Vec<Method>> = args.methods.split(',').map(str::parse).collect();
    let methods = match methods {
        Ok(m) => m,
        Err(e) => return Ok(usage_error("bench", &e.to_string())),
    };
    let cfg = BenchConfig {
        sizes: args.sizes.clone(),
        plan: DecimationPlan { steps: args.steps, ratio: args.ratio },
        methods,
        time_budget: Duration::from_secs_f64(args.time_budget.max(0.0)),
        memory_budget: args.memory_budget_mb.saturating_mul(1 << 20),
        precision: if args.f32 { Precision::F32 } else { Precision::F64 },
        idis_neighbors: args.idis_neighbors,
        idis_polarity: if args.idis_inverted { DensityPolarity::Inverted } else { DensityPolarity::Literal },
        crs_tau: args.tau,
        seed: args.seed,
    };
    let mut manifest = RunManifest::start("bench", recorded);
    manifest.seed("cloud", args.seed);
    let report = crate::sampling::run_decimation_benchmark(&cfg)?;
    ensure_parent(&args.out)?;
    fs::write(&args.out, report.to_csv())?;
    manifest.output(&args.out).finish(&manifest_path_for(&args.out))?;
    for row in &report.rows {
        println!("{:>5} n={:<9} {:>10.4}s {}", row.method, row.n_points, row.elapsed.as_secs_f64(), row.status.as_str());
    }
    Ok(if report.has_incomplete() { exit::INCOMPLETE } else { exit::OK })
}

pub fn cmd_train(args: &TrainArgs, recorded: &[String]) -> Result<i32> {
    let config = match &args.config {
        Some(path) => match read_config(path) {
            Ok(c) => c,
            Err(code) => return Ok(code),
        },
        None => {
            let mut c = args.data.task().network_config(args.seed);
            if !args.data.synthetic() {
                let first = load_cloud(&args.data.data[0])?;
                c.d_in = 3 + first.attribute_width();
            }
            c
        }
    };
    let scenes = args.data.scenes(config.k, false)?;
    let mut net = build_network(&config)?;
    let opts = TrainOptions { epochs: args.epochs, learning_rate: args.lr, seed: args.seed };
    let mut manifest = RunManifest::start("train", recorded);
    manifest.config = Some(config.to_text());
    manifest.seed("init", config.seed).seed("train", args.seed);
    if args.data.synthetic() {
        manifest.seed("scenes", args.data.scene_seed);
    }
    fs::create_dir_all(&args.out_dir)?;
    let report = train_with(&mut net, &scenes, &opts, |r| {
        eprintln!("epoch {:>3}  loss {:.5}  lr {:.6}  mIoU {:.4}", r.epoch, r.loss, r.lr, r.miou)
    });
    let report = match report {
        Ok(r) => r,
        Err(e @ Error::Diverged { .. }) => {
            eprintln!("error: {e}");
            return Ok(exit::SOFTWARE);
        }
        Err(e) => return Err(e),
    };
    let ckpt = args.out_dir.join("model.ckpt");
    fs::write(&ckpt, net.to_checkpoint())?;
    let log = args.out_dir.join("report.jsonl");
    report.write_jsonl(fs::File::create(&log)?)?;
    manifest.output(&ckpt).output(&log).finish(&args.out_dir.join("manifest.json"))?;
    println!("wrote {} ({} parameters)", ckpt.display(), net.parameter_count());
    Ok(exit::OK)
}

pub fn cmd_infer(args: &InferArgs, recorded: &[String]) -> Result<i32> {
    let net = read_checkpoint_file(&args.checkpoint)?;
    let cloud = load_cloud(&args.input)?;
    let width = 3 + cloud.attribute_width();
    if width != net.config.d_in {
        eprintln!(
            "error: the checkpoint expects {} input channels but {} provides {width}",
            net.config.d_in,
            args.input.display()
        );
        return Ok(exit::DATA);
    }
    let labels = net.predict(&NetworkInput::from_cloud(&cloud)?)?;
    ensure_parent(&args.out)?;
    if args.out.extension().is_some_and(|e| e == "label") {
        fs::write(&args.out, serialize_kitti_labels(&labels))?;
    } else {
        let mut text = String::with_capacity(labels.len() * 3);
        for l in &labels {
            text.push_str(&l.to_string());
            text.push('\n');
        }
        fs::write(&args.out, text)?;
    }
    let mut manifest = RunManifest::start("infer", recorded);
    manifest.config = Some(net.config.to_text());
    manifest.seed("init", net.config.seed);
    manifest.output(&args.out).finish(&manifest_path_for(&args.out))?;
    println!("wrote {} labels to {}", labels.len(), args.out.display());
    Ok(exit::OK)
}

pub fn cmd_eval(args: &EvalArgs, recorded: &[String]) -> Result<i32> {
    let net = read_checkpoint_file(&args.checkpoint)?;
    let scenes = args.data.scenes(net.config.k, true)?;
    if let Some(s) = scenes.iter().find(|s| s.input.features.last_dim() != net.config.d_in) {
        eprintln!("error: the checkpoint expects {} input channels, data has {}", net.config.d_in, s.input.features.last_dim());
        return Ok(exit::DATA);
    }
    let metrics = evaluate(&net, &scenes)?;
    ensure_parent(&args.out)?;
    let json = serde_json::to_string_pretty(&metrics).map_err(std::io::Error::from)?;
    fs::write(&args.out, json + "\n")?;
    let mut manifest = RunManifest::start("eval", recorded);
    manifest.config = Some(net.config.to_text());
    manifest.seed("init", net.config.seed);
    if args.data.synthetic() {
        manifest.seed("scenes", args.data.scene_seed);
    }
    manifest.output(&args.out).finish(&manifest_path_for(&args.out))?;
    println!("mIoU {:.4}  OA {:.4}  mAcc {:.4}", metrics.miou, metrics.oa, metrics.macc);
    Ok(exit::OK)
}

/// Header of the ablation comparison CSV.
pub const ABLATION_HEADER: &str = "ablation,seed,held_out_miou,held_out_oa,final_train_loss";

pub fn cmd_ablate(args: &AblateArgs, recorded: &[String]) -> Result<i32> {
    let ablation: Ablation = match args.ablation.parse() {
        Ok(a) => a,
        Err(e) => return Ok(usage_error("ablate", &e.to_string())),
    };
    let task = ToyTask {
        n_points: args.points,
        train_scenes: args.scenes,
        test_scenes: args.test_scenes,
        seed: args.scene_seed,
        ..Default::default()
    };
    let config = ablation.apply(&task.network_config(args.seed));
    let opts = TrainOptions { epochs: args.epochs, seed: args.seed, ..Default::default() };
    let mut manifest = RunManifest::start("ablate", recorded);
    manifest.config = Some(config.to_text());
    manifest.seed("init", config.seed).seed("train", args.seed).seed("scenes", args.scene_seed);
    let run = run_toy(&task, &config, &opts, |r| eprintln!("[{ablation}] epoch {:>3}  loss {:.5}", r.epoch, r.loss))?;
    let final_loss = run.report.epochs.last().map_or(f64::NAN, |r| r.loss);
    ensure_parent(&args.out)?;
    let fresh = !args.out.exists() || fs::metadata(&args.out)?.len() == 0;
    let mut file = OpenOptions::new().create(true).append(true).open(&args.out)?;
    if fresh {
        writeln!(file, "{ABLATION_HEADER}")?;
    }
    writeln!(file, "{ablation},{},{},{},{}", args.seed, run.held_out.miou, run.held_out.oa, final_loss)?;
    let stem = args.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let manifest_path = args.out.with_file_name(format!("{stem}_{ablation}_seed{}.manifest.json", args.seed));
    manifest.output(&args.out).finish(&manifest_path)?;
    println!("{ablation}: held-out mIoU {:.4}", run.held_out.miou);
    Ok(exit::OK)
}

pub fn cmd_dump_attn(args: &DumpAttnArgs, recorded: &[String]) -> Result<i32> {
    let net = match (&args.checkpoint, &args.config) {
        (Some(ckpt), _) => read_checkpoint_file(ckpt)?,
        (None, Some(cfg)) => match read_config(cfg) {
            Ok(c) => build_network(&c)?,
            Err(code) => return Ok(code),
        },
        (None, None) => return Ok(usage_error("dump-attn", "either --checkpoint or --config is required")),
    };
    let matrices = net.attention_matrices();
    if matrices.is_empty() {
        eprintln!("error: the network uses {} pooling and has no attention weights", net.config.pooling);
        return Ok(exit::DATA);
    }
    let paths = dump_attention_matrix(&args.out_dir, &matrices)?;
    let mut manifest = RunManifest::start("dump-attn", recorded);
    manifest.config = Some(net.config.to_text());
    manifest.seed("init", net.config.seed);
    for p in &paths {
        manifest.output(p);
    }
    manifest.finish(&args.out_dir.join("manifest.json"))?;
    println!("wrote {} attention matrices to {}", paths.len(), args.out_dir.display());
    Ok(exit::OK)
}

pub fn cmd_gen_scene(args: &GenSceneArgs, recorded: &[String]) -> Result<i32> {
    let mut spec = SceneSpec::new(args.points, args.classes, args.seed);
    spec.noise_sigma = args.noise;
    spec.extent = args.extent;
    let cloud = generate_scene(&spec)?;
    ensure_parent(&args.out)?;
    let mut manifest = RunManifest::start("gen-scene", recorded);
    manifest.seed("scene", args.seed);
    match args.out.extension().and_then(|e| e.to_str()) {
        Some("bin") => {
            let labels = args.out.with_extension("label");
            fs::write(&args.out, serialize_kitti_bin(&cloud))?;
            fs::write(&labels, serialize_kitti_labels(cloud.labels().unwrap_or_default()))?;
            manifest.output(&args.out).output(&labels);
        }
        Some("ply") => {
            fs::write(&args.out, serialize_ply(&cloud))?;
            manifest.output(&args.out);
        }
        _ => return Ok(usage_error("gen-scene", "--out must end in .ply or .bin")),
    }
    manifest.finish(&manifest_path_for(&args.out))?;
    println!("wrote {} points to {}", cloud.len(), args.out.display());
    Ok(exit::OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["randla", "frobnicate"]), exit::USAGE);
        assert_eq!(run(["randla", "--version"]), exit::OK);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let out = out.to_str().unwrap();
        assert_eq!(run(["randla", "bench", "--methods", "nosuch", "--out", out]), exit::USAGE);
        assert_eq!(run(["randla", "ablate", "nosuch", "--out", out]), exit::USAGE);
        assert!(!Path::new(out).exists());
    }

    #[test]
    fn error_mapping() {
        assert_eq!(exit_code(&Error::Data("x".into())), exit::DATA);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), exit::IO);
        assert_eq!(exit_code(&Error::Diverged { epoch: 1, scene: 0, loss: f64::NAN }), exit::SOFTWARE);
    }
}
