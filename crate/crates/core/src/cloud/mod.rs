//! Point-cloud data model and ingestion.

mod kitti;
mod ply;
mod scene;

pub use kitti::{parse_kitti_bin, parse_kitti_labels, serialize_kitti_bin, serialize_kitti_labels};
pub use ply::{parse_ply, serialize_ply};
pub use scene::{generate_scene, Primitive, SceneSpec};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Per-point attribute columns carried next to the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Attributes {
    /// One intensity value per point (KITTI scans).
    Intensity(Vec<f64>),
    /// RGB triples normalised to `[0, 1]`.
    Rgb(Vec<[f64; 3]>),
}

impl Attributes {
    pub fn width(&self) -> usize {
        match self {
            Attributes::Intensity(_) => 1,
            Attributes::Rgb(_) => 3,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Attributes::Intensity(v) => v.len(),
            Attributes::Rgb(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes row `i` into `out` (which must hold `width()` slots).
    pub fn write_row(&self, i: usize, out: &mut [f64]) {
        match self {
            Attributes::Intensity(v) => out[0] = v[i],
            Attributes::Rgb(v) => out.copy_from_slice(&v[i]),
        }
    }

    fn select(&self, idx: &[usize]) -> Attributes {
        match self {
            Attributes::Intensity(v) => Attributes::Intensity(idx.iter().map(|&i| v[i]).collect()),
            Attributes::Rgb(v) => Attributes::Rgb(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// N points with optional attributes and class labels.
///
/// Immutable once built; the constructors enforce finite coordinates and
/// matching row counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    positions: Vec<[f64; 3]>,
    attributes: Option<Attributes>,
    labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(positions: Vec<[f64; 3]>) -> Result<Self> {
        if let Some(row) = positions.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::Data(format!("non-finite coordinate in row {row}")));
        }
        Ok(PointCloud { positions, attributes: None, labels: None })
    }

    pub fn with_attributes(mut self, attributes: Attributes) -> Result<Self> {
        if attributes.len() != self.len() {
            return Err(Error::Data(format!(
                "attribute rows ({}) do not match point count ({})",
                attributes.len(),
                self.len()
            )));
        }
        self.attributes = Some(attributes);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Data(format!(
                "label rows ({}) do not match point count ({})",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn attributes(&self) -> Option<&Attributes> {
        self.attributes.as_ref()
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Attribute width: 0 (none), 1 (intensity) or 3 (RGB).
    pub fn attribute_width(&self) -> usize {
        self.attributes.as_ref().map_or(0, Attributes::width)
    }

    /// Checks that every label lies in `[0, n_class)`.
    pub fn check_labels(&self, n_class: usize) -> Result<()> {
        if let Some(labels) = &self.labels {
            if let Some((row, &l)) = labels.iter().enumerate().find(|(_, &l)| l as usize >= n_class) {
                return Err(Error::Data(format!("label {l} in row {row} is outside [0, {n_class})")));
            }
        }
        Ok(())
    }

    /// Rows `idx` of this cloud, in the given order.
    pub fn select(&self, idx: &[usize]) -> PointCloud {
        PointCloud {
            positions: idx.iter().map(|&i| self.positions[i]).collect(),
            attributes: self.attributes.as_ref().map(|a| a.select(idx)),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Seeded uniform subset of `n` points (the whole cloud when `n >= len`).
    ///
    /// Used to draw a fixed-size training input from a larger cloud; kept
    /// rows stay in their original order.
    pub fn precrop(&self, n: usize, seed: u64) -> PointCloud {
        if n >= self.len() {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = index::sample(&mut rng, self.len(), n).into_vec();
        idx.sort_unstable();
        self.select(&idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_positions() {
        let err = PointCloud::new(vec![[0.0, 0.0, 0.0], [f64::NAN, 1.0, 2.0]]).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn attribute_and_label_rows_must_match() {
        let c = PointCloud::new(vec![[0.0; 3]; 2]).unwrap();
        assert!(c.clone().with_attributes(Attributes::Intensity(vec![1.0])).is_err());
        assert!(c.clone().with_labels(vec![0, 1, 2]).is_err());
        let c = c.with_labels(vec![0, 3]).unwrap();
        assert!(c.check_labels(4).is_ok());
        assert!(c.check_labels(3).is_err());
    }

    #[test]
    fn precrop_is_seeded_and_ordered() {
        let pts: Vec<[f64; 3]> = (0..100).map(|i| [i as f64, 0.0, 0.0]).collect();
        let c = PointCloud::new(pts).unwrap();
        let a = c.precrop(10, 3);
        let b = c.precrop(10, 3);
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert!(a.positions().windows(2).all(|w| w[0][0] < w[1][0]));
        assert_eq!(c.precrop(1000, 0), c);
    }
}
