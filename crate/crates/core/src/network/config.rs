use std::fmt::Write as _;
use std::str::FromStr;

use crate::aggregation::{BlockConfig, LocSeConfig, LocSeVariant, Pooling};
use crate::{Error, Result};

/// How the cross-entropy loss weighs classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassWeighting {
    #[default]
    None,
    /// `w_c ∝ 1 / frequency_c` over the training labels, normalised to mean 1.
    InverseFrequency,
}

impl ClassWeighting {
    pub fn name(self) -> &'static str {
        match self {
            ClassWeighting::None => "none",
            ClassWeighting::InverseFrequency => "inverse_frequency",
        }
    }
}

impl FromStr for ClassWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(ClassWeighting::None),
            "inverse_frequency" => Ok(ClassWeighting::InverseFrequency),
            other => Err(Error::Config(format!("unknown class weighting `{other}`"))),
        }
    }
}

/// Hyper-parameters of the encoder-decoder segmentation network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Input channels per point: 3 (xyz), 4 (+intensity) or 6 (+rgb).
    pub d_in: usize,
    pub n_class: usize,
    /// Width of the per-point input layer ahead of the encoder.
    pub input_width: usize,
    /// Output width of each encoder layer; one decoder layer per entry.
    pub encoder_widths: Vec<usize>,
    /// Fraction of points kept after each encoder layer.
    pub decimation: f64,
    pub k: usize,
    pub units: usize,
    pub pooling: Pooling,
    pub locse: LocSeVariant,
    /// Hidden widths of the classification head.
    pub head_widths: Vec<usize>,
    pub dropout: f64,
    pub class_weighting: ClassWeighting,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            d_in: 3,
            n_class: 8,
            input_width: 8,
            encoder_widths: vec![32, 128, 256, 512],
            decimation: 0.25,
            k: 16,
            units: 2,
            pooling: Pooling::Attentive,
            locse: LocSeVariant::Full,
            head_widths: vec![64, 32],
            dropout: 0.5,
            class_weighting: ClassWeighting::None,
            seed: 0,
        }
    }
}

/// Smallest cloud the network accepts.
pub const MIN_POINTS: usize = 16;

impl NetworkConfig {
    pub fn new(d_in: usize, n_class: usize) -> Self {
        NetworkConfig { d_in, n_class, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !matches!(self.d_in, 3 | 4 | 6) {
            return fail(format!("d_in must be 3, 4 or 6, got {}", self.d_in));
        }
        if self.n_class == 0 {
            return fail("n_class must be at least 1".into());
        }
        if self.input_width == 0 {
            return fail("input_width must be positive".into());
        }
        if self.encoder_widths.is_empty() {
            return fail("at least one encoder layer is required".into());
        }
        if self.encoder_widths.iter().any(|&w| w < 4 || w % 4 != 0) {
            return fail(format!("encoder widths must be positive multiples of 4, got {:?}", self.encoder_widths));
        }
        if self.encoder_widths.windows(2).any(|w| w[1] < w[0]) {
            return fail(format!("encoder widths must be non-decreasing, got {:?}", self.encoder_widths));
        }
        if !(self.decimation > 0.0 && self.decimation < 1.0) {
            return fail(format!("decimation must lie in (0, 1), got {}", self.decimation));
        }
        if self.head_widths.contains(&0) {
            return fail("head widths must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        for layer in 0..self.encoder_widths.len() {
            self.block(layer).validate()?;
        }
        Ok(())
    }

    pub fn layers(&self) -> usize {
        self.encoder_widths.len()
    }

    /// Block shape of encoder layer `layer`; its output width is
    /// `encoder_widths[layer]`.
    pub fn block(&self, layer: usize) -> BlockConfig {
        BlockConfig {
            units: self.units,
            pooling: self.pooling,
            locse: LocSeConfig { variant: self.locse, k: self.k },
            d_out: self.encoder_widths[layer] / 2,
        }
    }

    /// Point count at every encoder level, starting with `n`.
    pub fn point_cascade(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![n];
        for _ in 0..self.layers() {
            let last = *counts.last().expect("non-empty");
            counts.push(crate::aggregation::decimated_count(last, self.decimation));
        }
        counts
    }

    /// Flat `key = value` text, one field per line.
    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("writing to a String");
        put("d_in", self.d_in.to_string());
        put("n_class", self.n_class.to_string());
        put("input_width", self.input_width.to_string());
        put("encoder_widths", list(&self.encoder_widths));
        put("decimation", self.decimation.to_string());
        put("k", self.k.to_string());
        put("units", self.units.to_string());
        put("pooling", self.pooling.to_string());
        put("locse", self.locse.to_string());
        put("head_widths", list(&self.head_widths));
        put("dropout", self.dropout.to_string());
        put("class_weights", self.class_weighting.name().to_string());
        put("seed", self.seed.to_string());
        s
    }

    /// Parses [`NetworkConfig::to_text`] output. Missing keys keep their
    /// defaults; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = NetworkConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn std::fmt::Display| Error::Config(format!("line {}: {key}: {e}", i + 1));
            let int = |v: &str| v.parse::<usize>().map_err(|e| bad(&e));
            let list = |v: &str| {
                v.split(',')
                    .filter(|p| !p.trim().is_empty())
                    .map(|p| p.trim().parse::<usize>().map_err(|e| bad(&e)))
                    .collect::<Result<Vec<_>>>()
            };
            match key {
                "d_in" => cfg.d_in = int(value)?,
                "n_class" => cfg.n_class = int(value)?,
                "input_width" => cfg.input_width = int(value)?,
                "encoder_widths" => cfg.encoder_widths = list(value)?,
                "decimation" => cfg.decimation = value.parse().map_err(|e| bad(&e))?,
                "k" => cfg.k = int(value)?,
                "units" => cfg.units = int(value)?,
                "pooling" => cfg.pooling = value.parse()?,
                "locse" => cfg.locse = value.parse()?,
                "head_widths" => cfg.head_widths = list(value)?,
                "dropout" => cfg.dropout = value.parse().map_err(|e| bad(&e))?,
                "class_weights" => cfg.class_weighting = value.parse()?,
                "seed" => cfg.seed = value.parse().map_err(|e| bad(&e))?,
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", i + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let cfg = NetworkConfig {
            d_in: 6,
            n_class: 13,
            encoder_widths: vec![16, 32],
            pooling: Pooling::Max,
            locse: LocSeVariant::CenterNeighborDist,
            class_weighting: ClassWeighting::InverseFrequency,
            decimation: 0.3,
            seed: 99,
            ..Default::default()
        };
        assert_eq!(NetworkConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        let partial = NetworkConfig::from_text("# toy\nn_class = 3\nunits=1\n").unwrap();
        assert_eq!((partial.n_class, partial.units, partial.k), (3, 1, 16));
    }

    #[test]
    fn rejects_invalid() {
        for text in ["n_class = 0", "encoder_widths = 64,32", "units = 4", "d_in = 5", "colour = red", "k"] {
            assert!(matches!(NetworkConfig::from_text(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn cascade() {
        let cfg = NetworkConfig::default();
        assert_eq!(cfg.point_cascade(1024), vec![1024, 256, 64, 16, 4]);
        assert_eq!(cfg.point_cascade(16), vec![16, 4, 1, 1, 1]);
        assert_eq!(cfg.block(1).d_out, 64);
    }
}
