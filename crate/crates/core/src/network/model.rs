use std::borrow::Cow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{NetworkConfig, MIN_POINTS};
use crate::aggregation::{dilated_residual_block, downsample_layer, upsample_layer, BlockParams};
use crate::cloud::PointCloud;
use crate::spatial::{knn, NeighborIndex};
use crate::tensor::{read_checkpoint, write_checkpoint, Activation, Graph, Linear, ParamStore, Tensor, Var};
use crate::{Error, Result};

/// Whether dropout is active and decimation follows the caller's seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    /// Dropout off; decimation uses the configuration seed, so repeated
    /// calls give identical logits.
    Infer,
}

/// Mixes `parts` into `base` (SplitMix64 finaliser per step).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(z << 6).wrapping_add(z >> 2);
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Shapes observed during one forward pass.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShapeTrace {
    /// Width after the input layer.
    pub input_width: usize,
    /// Point count after each encoder layer's decimation.
    pub encoder_points: Vec<usize>,
    /// Feature width produced by each encoder block.
    pub encoder_widths: Vec<usize>,
    /// `(rows, width)` after each decoder layer.
    pub decoder_shapes: Vec<(usize, usize)>,
    /// `(rows, width)` after each head layer, ending with the logits.
    pub head_shapes: Vec<(usize, usize)>,
    pub dropout_active: bool,
}

/// Network input prepared from a point cloud.
#[derive(Debug, Clone)]
pub struct NetworkInput {
    pub positions: Vec<[f64; 3]>,
    /// N×d_in: xyz followed by any attributes.
    pub features: Tensor,
    /// Neighbourhoods of the full-resolution points, reused across passes.
    pub neighbors: Option<NeighborIndex>,
}

impl NetworkInput {
    pub fn from_cloud(cloud: &PointCloud) -> Result<Self> {
        let n = cloud.len();
        let d = 3 + cloud.attribute_width();
        let mut data = vec![0.0; n * d];
        for (i, (row, p)) in data.chunks_mut(d).zip(cloud.positions()).enumerate() {
            row[..3].copy_from_slice(p);
            if let Some(a) = cloud.attributes() {
                a.write_row(i, &mut row[3..]);
            }
        }
        Ok(NetworkInput { positions: cloud.positions().to_vec(), features: Tensor::new(vec![n, d], data)?, neighbors: None })
    }

    /// Precomputes the `k` nearest neighbours of every point, which the first
    /// encoder layer then reuses on every pass.
    pub fn with_neighbors(mut self, k: usize) -> Result<Self> {
        self.neighbors = Some(knn(&self.positions, &self.positions, k.min(self.positions.len()))?);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Encoder-decoder segmentation network and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub config: NetworkConfig,
    pub params: ParamStore,
    pub input: Linear,
    pub blocks: Vec<BlockParams>,
    pub bottleneck: Linear,
    /// Ordered from the coarsest level to full resolution.
    pub decoder: Vec<Linear>,
    /// Hidden head layers followed by the classifier.
    pub head: Vec<Linear>,
}

/// Allocates and initialises a network; identical configs give identical
/// parameters.
pub fn build_network(config: &NetworkConfig) -> Result<Network> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ParamStore::new();
    let input = Linear::new(&mut params, "input", config.d_in, config.input_width, &mut rng);
    let mut blocks = Vec::with_capacity(config.layers());
    let mut width = config.input_width;
    for layer in 0..config.layers() {
        let block = BlockParams::new(&mut params, &format!("encoder{layer}"), width, config.block(layer), &mut rng)?;
        width = block.config.output_width();
        blocks.push(block);
    }
    let bottleneck = Linear::new(&mut params, "bottleneck", width, width, &mut rng);
    let mut decoder = Vec::with_capacity(config.layers());
    for (j, skip) in skip_widths(config).into_iter().rev().enumerate() {
        decoder.push(Linear::new(&mut params, &format!("decoder{j}"), width + skip, skip, &mut rng));
        width = skip;
    }
    let mut head = Vec::with_capacity(config.head_widths.len() + 1);
    for (j, &w) in config.head_widths.iter().enumerate() {
        head.push(Linear::new(&mut params, &format!("head{j}"), width, w, &mut rng));
        width = w;
    }
    head.push(Linear::new(&mut params, "classifier", width, config.n_class, &mut rng));
    Ok(Network { config: config.clone(), params, input, blocks, bottleneck, decoder, head })
}

/// Widths of the encoder features kept for the decoder, finest first: the
/// full-resolution output of the first block, then every decimated output
/// except the last.
fn skip_widths(config: &NetworkConfig) -> Vec<usize> {
    let w = &config.encoder_widths;
    std::iter::once(w[0]).chain(w[..w.len() - 1].iter().copied()).collect()
}

impl Network {
    pub fn parameter_count(&self) -> usize {
        self.params.scalar_count()
    }

    /// Records the forward pass on `g`, returning the N×n_class logits.
    pub fn forward_graph(&self, g: &mut Graph, input: &NetworkInput, mode: Mode, seed: u64) -> Result<(Var, ShapeTrace)> {
        let cfg = &self.config;
        let n = input.len();
        if n < MIN_POINTS {
            return Err(Error::Argument(format!("the network needs at least {MIN_POINTS} points, got {n}")));
        }
        if input.features.shape() != [n, cfg.d_in] {
            return Err(Error::Data(format!(
                "network expects {} input channels per point, got features of shape {:?}",
                cfg.d_in,
                input.features.shape()
            )));
        }
        let seed = match mode {
            Mode::Train => seed,
            Mode::Infer => cfg.seed,
        };
        let mut trace = ShapeTrace { dropout_active: mode == Mode::Train && cfg.dropout > 0.0, ..Default::default() };

        let x = g.constant(input.features.clone());
        let mut x = g.shared_mlp(x, &self.input, Activation::leaky())?;
        trace.input_width = g.shape(x)[1];

        let mut levels = vec![input.positions.clone()];
        let mut skips = Vec::with_capacity(cfg.layers() + 1);
        for (layer, block) in self.blocks.iter().enumerate() {
            let pos = &levels[layer];
            let k = cfg.k.min(pos.len());
            let idx = match &input.neighbors {
                Some(cached) if layer == 0 && cached.k() == k && cached.n_queries() == pos.len() => Cow::Borrowed(cached),
                _ => Cow::Owned(knn(pos, pos, k)?),
            };
            let encoded = dilated_residual_block(g, pos, x, &idx, block)?;
            trace.encoder_widths.push(g.shape(encoded)[1]);
            if layer == 0 {
                skips.push(encoded);
            }
            let down = downsample_layer(g, pos, encoded, cfg.decimation, derive_seed(seed, &[1, layer as u64]))?;
            trace.encoder_points.push(down.positions.len());
            skips.push(down.features);
            x = down.features;
            levels.push(down.positions);
        }

        x = g.shared_mlp(x, &self.bottleneck, Activation::leaky())?;
        for (j, mlp) in self.decoder.iter().enumerate() {
            let fine = cfg.layers() - 1 - j;
            x = upsample_layer(g, &levels[fine + 1], x, &levels[fine], skips[fine], mlp)?;
            trace.decoder_shapes.push((g.shape(x)[0], g.shape(x)[1]));
        }

        let (hidden, classifier) = self.head.split_at(self.head.len() - 1);
        for mlp in hidden {
            x = g.shared_mlp(x, mlp, Activation::leaky())?;
            trace.head_shapes.push((g.shape(x)[0], g.shape(x)[1]));
        }
        x = g.dropout(x, cfg.dropout, mode == Mode::Train, derive_seed(seed, &[2]))?;
        let logits = g.shared_mlp(x, &classifier[0], Activation::None)?;
        trace.head_shapes.push((g.shape(logits)[0], g.shape(logits)[1]));
        Ok((logits, trace))
    }

    /// Logits for `input` without recording gradients.
    pub fn forward(&self, input: &NetworkInput, mode: Mode, seed: u64) -> Result<(Tensor, ShapeTrace)> {
        let mut g = Graph::with_params(&self.params);
        let (logits, trace) = self.forward_graph(&mut g, input, mode, seed)?;
        Ok((g.value(logits).clone().requires_grad(false), trace))
    }

    /// Per-point arg-max class in inference mode.
    pub fn predict(&self, input: &NetworkInput) -> Result<Vec<u32>> {
        let (logits, _) = self.forward(input, Mode::Infer, 0)?;
        Ok(argmax_rows(&logits))
    }

    /// Weight matrices of the attention-score MLPs of the first unit in each
    /// encoder layer (empty when pooling is not attentive).
    pub fn attention_matrices(&self) -> Vec<&Tensor> {
        self.blocks
            .iter()
            .filter_map(|b| b.score_layers().next())
            .map(|l| self.params.get(l.weight))
            .collect()
    }

    /// Serialises parameters together with the configuration text.
    pub fn to_checkpoint(&self) -> Vec<u8> {
        write_checkpoint(&self.params, &self.config.to_text())
    }

    /// Rebuilds the network described by a checkpoint and loads its weights.
    pub fn from_checkpoint(bytes: &[u8]) -> Result<Network> {
        let (params, meta) = read_checkpoint(bytes)?;
        let config = NetworkConfig::from_text(&meta)?;
        let mut net = build_network(&config)?;
        net.params.load_from(&params)?;
        Ok(net)
    }
}

pub fn argmax_rows(logits: &Tensor) -> Vec<u32> {
    (0..logits.rows())
        .map(|r| {
            let row = logits.row(r);
            let mut best = 0;
            for (c, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = c;
                }
            }
            best as u32
        })
        .collect()
}
