use std::io::Write;

use serde::Serialize;

use super::config::ClassWeighting;
use super::metrics::{ConfusionMatrix, SegmentationMetrics};
use super::model::{argmax_rows, derive_seed, Mode, Network, NetworkInput};
use crate::cloud::PointCloud;
use crate::tensor::{adam_step, lr_decay, AdamState, Graph};
use crate::{Error, Result};

/// Initial learning rate of the default recipe.
pub const DEFAULT_LEARNING_RATE: f64 = 0.01;

/// A labelled training or evaluation cloud with its network input.
#[derive(Debug, Clone)]
pub struct Scene {
    pub input: NetworkInput,
    pub labels: Vec<u32>,
}

impl Scene {
    pub fn from_cloud(cloud: &PointCloud) -> Result<Self> {
        let labels = cloud.labels().ok_or_else(|| Error::Data("scene has no labels".into()))?.to_vec();
        Ok(Scene { input: NetworkInput::from_cloud(cloud)?, labels })
    }

    /// See [`NetworkInput::with_neighbors`].
    pub fn with_neighbors(mut self, k: usize) -> Result<Self> {
        self.input = self.input.with_neighbors(k)?;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Seeds dropout and decimation for every step.
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { epochs: 50, learning_rate: DEFAULT_LEARNING_RATE, seed: 0 }
    }
}

/// One line of the training report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean scene loss over the epoch.
    pub loss: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
    /// mIoU of the training-mode predictions made during the epoch.
    pub miou: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainingReport {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingReport {
    /// One JSON object per epoch.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.epochs {
            serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Inverse-frequency weights normalised to mean 1 over the classes present.
pub fn inverse_frequency_weights(scenes: &[Scene], n_class: usize) -> Vec<f64> {
    let mut counts = vec![0u64; n_class];
    for s in scenes {
        for &l in &s.labels {
            if let Some(c) = counts.get_mut(l as usize) {
                *c += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    let mut w: Vec<f64> = counts.iter().map(|&c| if c == 0 { 0.0 } else { total as f64 / c as f64 }).collect();
    let present = counts.iter().filter(|&&c| c > 0).count().max(1);
    let mean = w.iter().sum::<f64>() / present as f64;
    if mean > 0.0 {
        w.iter_mut().for_each(|v| *v /= mean);
    }
    w
}

/// Trains `net` one scene per step with Adam, decaying the learning rate
/// after every epoch. `on_epoch` sees each record as it is produced.
pub fn train_with<F: FnMut(&EpochRecord)>(
    net: &mut Network,
    scenes: &[Scene],
    opts: &TrainOptions,
    mut on_epoch: F,
) -> Result<TrainingReport> {
    if scenes.is_empty() {
        return Err(Error::Data("training needs at least one scene".into()));
    }
    let n_class = net.config.n_class;
    for s in scenes {
        if s.labels.len() != s.input.len() {
            return Err(Error::Data(format!("{} labels for {} points", s.labels.len(), s.input.len())));
        }
        if let Some(&bad) = s.labels.iter().find(|&&l| l as usize >= n_class) {
            return Err(Error::Data(format!("label {bad} outside 0..{n_class}")));
        }
    }
    let weights = match net.config.class_weighting {
        ClassWeighting::None => None,
        ClassWeighting::InverseFrequency => Some(inverse_frequency_weights(scenes, n_class)),
    };
    let mut adam = AdamState::new(&net.params, opts.learning_rate);
    let mut report = TrainingReport::default();
    for epoch in 0..opts.epochs {
        let mut confusion = ConfusionMatrix::new(n_class);
        let mut loss_sum = 0.0;
        for (i, scene) in scenes.iter().enumerate() {
            let step_seed = derive_seed(opts.seed, &[epoch as u64, i as u64]);
            let mut g = Graph::with_params(&net.params);
            let (logits, _) = net.forward_graph(&mut g, &scene.input, Mode::Train, step_seed)?;
            let loss = g.softmax_cross_entropy(logits, &scene.labels, weights.as_deref())?;
            let value = g.value(loss).data()[0];
            if !value.is_finite() {
                return Err(Error::Diverged { epoch: epoch + 1, scene: i, loss: value });
            }
            confusion.add(&scene.labels, &argmax_rows(g.value(logits)))?;
            g.backward(loss)?;
            let grads: Vec<Option<&[f64]>> = net.params.ids().map(|id| g.grad(g.param(id))).collect();
            adam_step(&mut net.params, &grads, &mut adam).map_err(|e| match e {
                Error::Optimization { .. } => Error::Diverged { epoch: epoch + 1, scene: i, loss: value },
                other => other,
            })?;
            loss_sum += value;
        }
        let record = EpochRecord {
            epoch: epoch + 1,
            loss: loss_sum / scenes.len() as f64,
            lr: adam.lr,
            miou: SegmentationMetrics::from_confusion(&confusion).miou,
        };
        on_epoch(&record);
        report.epochs.push(record);
        lr_decay(&mut adam);
    }
    Ok(report)
}

pub fn train(net: &mut Network, scenes: &[Scene], opts: &TrainOptions) -> Result<TrainingReport> {
    train_with(net, scenes, opts, |_| {})
}

/// Inference-mode metrics accumulated over all points of all scenes.
pub fn evaluate(net: &Network, scenes: &[Scene]) -> Result<SegmentationMetrics> {
    let mut confusion = ConfusionMatrix::new(net.config.n_class);
    for s in scenes {
        confusion.add(&s.labels, &net.predict(&s.input)?)?;
    }
    Ok(SegmentationMetrics::from_confusion(&confusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{generate_scene, SceneSpec};
    use crate::network::{build_network, NetworkConfig};

    fn toy(n_class: usize) -> (Network, Vec<Scene>) {
        let cfg = NetworkConfig { n_class, encoder_widths: vec![8, 16], k: 4, seed: 3, ..Default::default() };
        let scenes = (0..2)
            .map(|s| Scene::from_cloud(&generate_scene(&SceneSpec::new(128, n_class, s)).unwrap()).unwrap())
            .collect();
        (build_network(&cfg).unwrap(), scenes)
    }

    #[test]
    fn learning_rate_schedule_and_reproducibility() {
        let (mut a, scenes) = toy(3);
        let mut b = a.clone();
        let opts = TrainOptions { epochs: 3, seed: 5, ..Default::default() };
        let ra = train(&mut a, &scenes, &opts).unwrap();
        let rb = train(&mut b, &scenes, &opts).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a.params, b.params);
        let lr: Vec<f64> = ra.epochs.iter().map(|r| r.lr).collect();
        for (got, want) in lr.iter().zip([0.01, 0.0095, 0.009025]) {
            assert!((got - want).abs() < 1e-15);
        }
        let mut text = Vec::new();
        ra.write_jsonl(&mut text).unwrap();
        let first: serde_json::Value = serde_json::from_str(String::from_utf8(text).unwrap().lines().next().unwrap()).unwrap();
        assert_eq!(first["epoch"], 1);
    }

    #[test]
    fn zero_epochs_leaves_weights() {
        let (mut net, scenes) = toy(3);
        let before = net.params.clone();
        let r = train(&mut net, &scenes, &TrainOptions { epochs: 0, ..Default::default() }).unwrap();
        assert!(r.epochs.is_empty());
        assert_eq!(net.params, before);
    }

    #[test]
    fn bad_labels_and_weights() {
        let (mut net, mut scenes) = toy(3);
        scenes[0].labels[0] = 7;
        assert!(matches!(train(&mut net, &scenes, &TrainOptions::default()), Err(Error::Data(_))));
        let (_, scenes) = toy(2);
        let w = inverse_frequency_weights(&scenes, 3);
        assert_eq!(w[2], 0.0);
        assert!((w[0] + w[1] - 2.0).abs() < 1e-12);
    }
}
