//! KITTI / SemanticKITTI scan and label files.
//!
//! A scan is a packed sequence of little-endian `f32` quadruples
//! `(x, y, z, intensity)`. A label file holds one little-endian `u32` per
//! point; the lower 16 bits carry the semantic class.

use super::{Attributes, PointCloud};
use crate::{Error, Result};

const RECORD: usize = 16;

pub fn parse_kitti_bin(bytes: &[u8]) -> Result<PointCloud> {
    if !bytes.len().is_multiple_of(RECORD) {
        return Err(Error::Format(format!(
            "scan length {} is not a multiple of {RECORD} bytes",
            bytes.len()
        )));
    }
    let n = bytes.len() / RECORD;
    let mut positions = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    for rec in bytes.chunks_exact(RECORD) {
        let f = |i: usize| f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().unwrap()) as f64;
        positions.push([f(0), f(1), f(2)]);
        intensity.push(f(3));
    }
    PointCloud::new(positions)?.with_attributes(Attributes::Intensity(intensity))
}

/// Inverse of [`parse_kitti_bin`]. Values are narrowed to `f32`; a missing
/// intensity column is written as zeros.
pub fn serialize_kitti_bin(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * RECORD);
    for (i, p) in cloud.positions().iter().enumerate() {
        let intensity = match cloud.attributes() {
            Some(Attributes::Intensity(v)) => v[i],
            _ => 0.0,
        };
        for v in [p[0], p[1], p[2], intensity] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

/// Decodes a label file into semantic class ids (lower 16 bits).
pub fn parse_kitti_labels(bytes: &[u8]) -> Result<Vec<u32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Format(format!(
            "label file length {} is not a multiple of 4 bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()) & 0xffff)
        .collect())
}

pub fn serialize_kitti_labels(labels: &[u32]) -> Vec<u8> {
    labels.iter().flat_map(|l| (l & 0xffff).to_le_bytes()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_record() {
        let mut bytes = Vec::new();
        for v in [1.0f32, 2.0, 3.0, 0.5] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let c = parse_kitti_bin(&bytes).unwrap();
        assert_eq!(c.positions(), &[[1.0, 2.0, 3.0]]);
        assert_eq!(c.attributes(), Some(&Attributes::Intensity(vec![0.5])));
    }

    #[test]
    fn empty_and_misaligned() {
        assert_eq!(parse_kitti_bin(&[]).unwrap().len(), 0);
        assert!(matches!(parse_kitti_bin(&[0u8; 17]), Err(Error::Format(_))));
        assert!(matches!(parse_kitti_labels(&[0u8; 5]), Err(Error::Format(_))));
    }

    #[test]
    fn labels_keep_lower_half() {
        let raw: Vec<u8> = [0x0003_0028u32, 7].iter().flat_map(|v| v.to_le_bytes()).collect();
        assert_eq!(parse_kitti_labels(&raw).unwrap(), vec![40, 7]);
        assert_eq!(parse_kitti_labels(&serialize_kitti_labels(&[40, 7])).unwrap(), vec![40, 7]);
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(rows in prop::collection::vec(prop::array::uniform4(-1e4f32..1e4), 0..64)) {
            let positions = rows.iter().map(|r| [r[0] as f64, r[1] as f64, r[2] as f64]).collect();
            let intensity = rows.iter().map(|r| r[3] as f64).collect();
            let cloud = PointCloud::new(positions).unwrap()
                .with_attributes(Attributes::Intensity(intensity)).unwrap();
            let bytes = serialize_kitti_bin(&cloud);
            let back = parse_kitti_bin(&bytes).unwrap();
            prop_assert_eq!(&back, &cloud);
            prop_assert_eq!(serialize_kitti_bin(&back), bytes);
        }
    }
}
