use rand::Rng;

use super::locse::{locse, neighborhood_tensors, raw_position_encoding, LocSeConfig, LocSeVariant};
use super::pool::{attentive_pool, Pooling};
use crate::spatial::NeighborIndex;
use crate::tensor::{Activation, Graph, Linear, MlpParams, ParamStore, Var, DEFAULT_LEAKY_SLOPE};
use crate::{Error, Result};

/// Shape of one dilated residual block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    /// Number of chained LocSE + pooling units (1 to 3).
    pub units: usize,
    pub pooling: Pooling,
    pub locse: LocSeConfig,
    /// Nominal width; the block emits `2 · d_out` channels.
    pub d_out: usize,
}

impl Default for BlockConfig {
    fn default() -> Self {
        BlockConfig { units: 2, pooling: Pooling::Attentive, locse: LocSeConfig::default(), d_out: 16 }
    }
}

impl BlockConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.units) {
            return Err(Error::Config(format!("units must be 1, 2 or 3, got {}", self.units)));
        }
        if self.locse.k == 0 {
            return Err(Error::Config("neighbour count k must be at least 1".into()));
        }
        if self.d_out < 2 || !self.d_out.is_multiple_of(2) {
            return Err(Error::Config(format!("block width d_out must be even and ≥ 2, got {}", self.d_out)));
        }
        Ok(())
    }

    /// Width of the features flowing between units.
    pub fn hidden(&self) -> usize {
        self.d_out / 2
    }

    pub fn output_width(&self) -> usize {
        2 * self.d_out
    }
}

/// Parameters of one LocSE + pooling unit.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitParams {
    /// Absent when the spatial encoding is switched off.
    pub locse: Option<Linear>,
    /// Attention-score MLP; present only for attentive pooling.
    pub score: Option<Linear>,
    pub post: Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub config: BlockConfig,
    pub d_in: usize,
    pub pre: Linear,
    pub units: Vec<UnitParams>,
    pub post: Linear,
    pub skip: Linear,
}

impl BlockParams {
    /// Registers a block taking `d_in` channels under the name prefix `name`.
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, d_in: usize, config: BlockConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if d_in == 0 {
            return Err(Error::Config("block input width must be positive".into()));
        }
        let h = config.hidden();
        let pre = Linear::new(store, &format!("{name}.pre"), d_in, h, rng);
        let raw = config.locse.variant.raw_width();
        let mut units = Vec::with_capacity(config.units);
        for u in 0..config.units {
            let prefix = format!("{name}.unit{u}");
            let (locse, pooled) = match config.locse.variant {
                LocSeVariant::Off => (None, h),
                _ => (Some(Linear::new(store, &format!("{prefix}.locse"), raw, h, rng)), 2 * h),
            };
            let score = (config.pooling == Pooling::Attentive).then(|| {
                Linear::register_unbiased(store, &format!("{prefix}.score"), MlpParams::init(pooled, pooled, rng))
            });
            let width = if u + 1 == config.units { config.d_out } else { h };
            let post = Linear::new(store, &format!("{prefix}.post"), pooled, width, rng);
            units.push(UnitParams { locse, score, post });
        }
        let post = Linear::new(store, &format!("{name}.post"), config.d_out, config.output_width(), rng);
        let skip = Linear::new(store, &format!("{name}.skip"), d_in, config.output_width(), rng);
        Ok(BlockParams { config, d_in, pre, units, post, skip })
    }

    /// Attention-score MLPs, one per unit (empty unless pooling is attentive).
    pub fn score_layers(&self) -> impl Iterator<Item = &Linear> {
        self.units.iter().filter_map(|u| u.score.as_ref())
    }
}

/// Dilated residual block over the neighbourhoods `idx` of `positions`.
///
/// Main path: pre-MLP to `d_out/2`, the chained units, then a linear map to
/// `2·d_out`. Skip path: linear map from the input to `2·d_out`. The output is
/// `leaky_relu(main + skip)`, one row per point.
pub fn dilated_residual_block(
    g: &mut Graph,
    positions: &[[f64; 3]],
    features: Var,
    idx: &NeighborIndex,
    params: &BlockParams,
) -> Result<Var> {
    let shape = g.shape(features);
    if shape.len() != 2 || shape[0] != positions.len() || shape[1] != params.d_in {
        return Err(Error::Shape(format!(
            "block expects {}×{} features, got {shape:?}",
            positions.len(),
            params.d_in
        )));
    }
    let raw = match params.config.locse.variant {
        LocSeVariant::Off => None,
        variant => {
            let (center, neighbors) = neighborhood_tensors(positions, idx)?;
            Some(g.constant(raw_position_encoding(&center, &neighbors, variant)?))
        }
    };
    let mut x = g.shared_mlp(features, &params.pre, Activation::leaky())?;
    for unit in &params.units {
        let fhat = locse(g, raw, x, idx, unit.locse.as_ref())?;
        x = attentive_pool(g, fhat, unit.score.as_ref(), &unit.post, params.config.pooling)?;
    }
    let main = g.shared_mlp(x, &params.post, Activation::None)?;
    let skip = g.shared_mlp(features, &params.skip, Activation::None)?;
    let sum = g.add(main, skip)?;
    Ok(g.leaky_relu(sum, DEFAULT_LEAKY_SLOPE))
}
