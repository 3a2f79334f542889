use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

/// Coordinate scalar: `f64` by default, `f32` for the reduced-precision
/// benchmark mode.
pub trait Real:
    Copy + Debug + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Send + Sync + 'static
{
    const ZERO: Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn total_cmp(&self, other: &Self) -> Ordering;
}

impl Real for f64 {
    const ZERO: Self = 0.0;
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

impl Real for f32 {
    const ZERO: Self = 0.0;
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f32::total_cmp(self, other)
    }
}

/// Squared Euclidean distance. Every distance comparison in the crate goes
/// through this one expression so independent code paths agree bit for bit.
#[inline]
pub fn dist2<P: Real>(a: &[P; 3], b: &[P; 3]) -> P {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

pub fn convert<P: Real>(points: &[[f64; 3]]) -> Vec<[P; 3]> {
    points.iter().map(|p| [P::from_f64(p[0]), P::from_f64(p[1]), P::from_f64(p[2])]).collect()
}
