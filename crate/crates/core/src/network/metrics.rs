use serde::Serialize;

use crate::{Error, Result};

/// Point counts indexed by (ground truth, prediction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_class: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_class: usize) -> Self {
        ConfusionMatrix { n_class, counts: vec![0; n_class * n_class] }
    }

    pub fn n_class(&self) -> usize {
        self.n_class
    }

    /// Count of points with ground truth `truth` predicted as `pred`.
    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.n_class + pred]
    }

    pub fn add(&mut self, truth: &[u32], pred: &[u32]) -> Result<()> {
        if truth.len() != pred.len() {
            return Err(Error::Shape(format!("{} labels against {} predictions", truth.len(), pred.len())));
        }
        let c = self.n_class;
        if let Some(&bad) = truth.iter().chain(pred).find(|&&l| l as usize >= c) {
            return Err(Error::Data(format!("label {bad} outside 0..{c}")));
        }
        for (&t, &p) in truth.iter().zip(pred) {
            self.counts[t as usize * c + p as usize] += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n_class != self.n_class {
            return Err(Error::Shape(format!("merging {} and {} classes", self.n_class, other.n_class)));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Rows of the matrix, ground truth first.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.n_class.max(1)).map(<[u64]>::to_vec).collect()
    }
}

/// Segmentation quality derived from a [`ConfusionMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentationMetrics {
    pub confusion: Vec<Vec<u64>>,
    /// `NaN` for classes absent from both truth and prediction.
    pub per_class_iou: Vec<f64>,
    /// Mean IoU over the classes that occur in the ground truth.
    pub miou: f64,
    pub oa: f64,
    /// Mean recall over the classes that occur in the ground truth.
    pub macc: f64,
}

impl SegmentationMetrics {
    pub fn from_confusion(m: &ConfusionMatrix) -> Self {
        let c = m.n_class();
        let (mut iou_sum, mut acc_sum, mut present) = (0.0, 0.0, 0usize);
        let mut per_class_iou = Vec::with_capacity(c);
        let mut trace = 0u64;
        for k in 0..c {
            let tp = m.get(k, k);
            let gt: u64 = (0..c).map(|p| m.get(k, p)).sum();
            let pred: u64 = (0..c).map(|t| m.get(t, k)).sum();
            let union = gt + pred - tp;
            trace += tp;
            per_class_iou.push(if union == 0 { f64::NAN } else { tp as f64 / union as f64 });
            if gt > 0 {
                present += 1;
                iou_sum += tp as f64 / union as f64;
                acc_sum += tp as f64 / gt as f64;
            }
        }
        let total = m.total();
        let mean = |s: f64| if present == 0 { 0.0 } else { s / present as f64 };
        SegmentationMetrics {
            confusion: m.rows(),
            per_class_iou,
            miou: mean(iou_sum),
            oa: if total == 0 { 0.0 } else { trace as f64 / total as f64 },
            macc: mean(acc_sum),
        }
    }

    pub fn compute(truth: &[u32], pred: &[u32], n_class: usize) -> Result<Self> {
        let mut m = ConfusionMatrix::new(n_class);
        m.add(truth, pred)?;
        Ok(Self::from_confusion(&m))
    }
}
