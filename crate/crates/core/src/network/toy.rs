use std::fmt;
use std::str::FromStr;

use super::config::NetworkConfig;
use super::model::{build_network, derive_seed, Network};
use super::metrics::SegmentationMetrics;
use super::train::{evaluate, train_with, EpochRecord, Scene, TrainOptions, TrainingReport};
use crate::aggregation::{LocSeVariant, Pooling};
use crate::cloud::{generate_scene, SceneSpec};
use crate::{Error, Result};

/// A family of seeded synthetic scenes split into training and held-out sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyTask {
    pub n_points: usize,
    pub n_class: usize,
    pub train_scenes: usize,
    pub test_scenes: usize,
    pub noise_sigma: f64,
    /// Scenes are drawn from seeds derived from this one.
    pub seed: u64,
}

impl Default for ToyTask {
    fn default() -> Self {
        ToyTask { n_points: 4096, n_class: 3, train_scenes: 20, test_scenes: 5, noise_sigma: 0.01, seed: 0 }
    }
}

impl ToyTask {
    fn scene(&self, split: u64, i: usize, k: usize) -> Result<Scene> {
        let mut spec = SceneSpec::new(self.n_points, self.n_class, derive_seed(self.seed, &[split, i as u64]));
        spec.noise_sigma = self.noise_sigma;
        Scene::from_cloud(&generate_scene(&spec)?)?.with_neighbors(k)
    }

    /// Training scenes with their full-resolution neighbourhoods precomputed.
    pub fn train_set(&self, k: usize) -> Result<Vec<Scene>> {
        (0..self.train_scenes).map(|i| self.scene(0, i, k)).collect()
    }

    pub fn test_set(&self, k: usize) -> Result<Vec<Scene>> {
        (0..self.test_scenes).map(|i| self.scene(1, i, k)).collect()
    }

    /// Desk-scale network for this task: four encoder layers of widths
    /// 8 to 64 instead of 32 to 512, everything else at the defaults.
    pub fn network_config(&self, seed: u64) -> NetworkConfig {
        NetworkConfig { d_in: 3, n_class: self.n_class, encoder_widths: vec![8, 16, 32, 64], seed, ..Default::default() }
    }
}

/// Outcome of training on a [`ToyTask`] and scoring the held-out scenes.
#[derive(Debug, Clone)]
pub struct ToyRun {
    pub network: Network,
    pub report: TrainingReport,
    pub held_out: SegmentationMetrics,
}

/// Builds `config`, trains it on the task's training scenes and evaluates the
/// held-out scenes in inference mode.
pub fn run_toy<F: FnMut(&EpochRecord)>(
    task: &ToyTask,
    config: &NetworkConfig,
    opts: &TrainOptions,
    on_epoch: F,
) -> Result<ToyRun> {
    let train = task.train_set(config.k)?;
    let test = task.test_set(config.k)?;
    let mut network = build_network(config)?;
    let report = train_with(&mut network, &train, opts, on_epoch)?;
    let held_out = evaluate(&network, &test)?;
    Ok(ToyRun { network, report, held_out })
}

/// Architectural variants compared against the full configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ablation {
    Full,
    NoLocSe,
    MaxPool,
    MeanPool,
    SumPool,
    OneUnit,
    ThreeUnits,
    /// Spatial encoding restricted to one of the five reduced term sets.
    LocSe(LocSeVariant),
}

impl Ablation {
    pub const ALL: [Ablation; 12] = [
        Ablation::Full,
        Ablation::NoLocSe,
        Ablation::MaxPool,
        Ablation::MeanPool,
        Ablation::SumPool,
        Ablation::OneUnit,
        Ablation::ThreeUnits,
        Ablation::LocSe(LocSeVariant::CenterOnly),
        Ablation::LocSe(LocSeVariant::NeighborOnly),
        Ablation::LocSe(LocSeVariant::CenterNeighbor),
        Ablation::LocSe(LocSeVariant::CenterNeighborDist),
        Ablation::LocSe(LocSeVariant::CenterNeighborRel),
    ];

    /// `config` with this variant's change applied.
    pub fn apply(self, config: &NetworkConfig) -> NetworkConfig {
        let mut c = config.clone();
        match self {
            Ablation::Full => {}
            Ablation::NoLocSe => c.locse = LocSeVariant::Off,
            Ablation::MaxPool => c.pooling = Pooling::Max,
            Ablation::MeanPool => c.pooling = Pooling::Mean,
            Ablation::SumPool => c.pooling = Pooling::Sum,
            Ablation::OneUnit => c.units = 1,
            Ablation::ThreeUnits => c.units = 3,
            Ablation::LocSe(v) => c.locse = v,
        }
        c
    }

    pub fn id(self) -> String {
        match self {
            Ablation::Full => "full".into(),
            Ablation::NoLocSe => "no_locse".into(),
            Ablation::MaxPool => "max_pool".into(),
            Ablation::MeanPool => "mean_pool".into(),
            Ablation::SumPool => "sum_pool".into(),
            Ablation::OneUnit => "one_unit".into(),
            Ablation::ThreeUnits => "three_units".into(),
            Ablation::LocSe(v) => {
                let n = Self::ALL[7..].iter().position(|a| *a == Ablation::LocSe(v)).map_or(0, |p| p + 1);
                format!("locse_{n}")
            }
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.id() == s.trim())
            .ok_or_else(|| Error::Argument(format!("unknown ablation `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ablation_ids_round_trip() {
        let ids: Vec<String> = Ablation::ALL.iter().map(|a| a.id()).collect();
        assert_eq!(ids[7..], ["locse_1", "locse_2", "locse_3", "locse_4", "locse_5"]);
        for a in Ablation::ALL {
            assert_eq!(a.id().parse::<Ablation>().unwrap(), a);
        }
        assert!("nosuch".parse::<Ablation>().is_err());
        let base = NetworkConfig::default();
        assert_eq!(Ablation::OneUnit.apply(&base).units, 1);
        assert_eq!(Ablation::LocSe(LocSeVariant::CenterNeighborRel).apply(&base).locse.raw_width(), 9);
        for a in Ablation::ALL {
            a.apply(&base).validate().unwrap();
        }
    }

    #[test]
    fn task_scenes_are_reproducible_and_disjoint() {
        let task = ToyTask { n_points: 64, train_scenes: 2, test_scenes: 1, ..Default::default() };
        let a = task.train_set(4).unwrap();
        let b = task.train_set(4).unwrap();
        assert_eq!(a[0].input.positions, b[0].input.positions);
        assert_ne!(a[0].input.positions, a[1].input.positions);
        assert_ne!(task.test_set(4).unwrap()[0].input.positions, a[0].input.positions);
    }
}
