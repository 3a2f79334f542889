use std::fmt;
use std::str::FromStr;

use crate::spatial::NeighborIndex;
use crate::tensor::{Activation, Graph, Linear, Tensor, Var};
use crate::{Error, Result};

/// Which geometric terms the local spatial encoding feeds to its MLP.
///
/// The terms are concatenated in the order centre, neighbour, offset
/// (`centre − neighbour`), distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocSeVariant {
    /// `p_i`
    CenterOnly,
    /// `p_i^k`
    NeighborOnly,
    /// `p_i ⊕ p_i^k`
    CenterNeighbor,
    /// `p_i ⊕ p_i^k ⊕ ‖p_i − p_i^k‖`
    CenterNeighborDist,
    /// `p_i ⊕ p_i^k ⊕ (p_i − p_i^k)`
    CenterNeighborRel,
    /// `p_i ⊕ p_i^k ⊕ (p_i − p_i^k) ⊕ ‖p_i − p_i^k‖`
    Full,
    /// No spatial encoding: neighbour features go straight to pooling.
    Off,
}

impl LocSeVariant {
    pub const ALL: [LocSeVariant; 7] = [
        LocSeVariant::CenterOnly,
        LocSeVariant::NeighborOnly,
        LocSeVariant::CenterNeighbor,
        LocSeVariant::CenterNeighborDist,
        LocSeVariant::CenterNeighborRel,
        LocSeVariant::Full,
        LocSeVariant::Off,
    ];

    fn terms(self) -> (bool, bool, bool, bool) {
        use LocSeVariant::*;
        match self {
            CenterOnly => (true, false, false, false),
            NeighborOnly => (false, true, false, false),
            CenterNeighbor => (true, true, false, false),
            CenterNeighborDist => (true, true, false, true),
            CenterNeighborRel => (true, true, true, false),
            Full => (true, true, true, true),
            Off => (false, false, false, false),
        }
    }

    /// Width of the raw geometric vector per neighbour.
    pub fn raw_width(self) -> usize {
        let (c, n, r, d) = self.terms();
        3 * (c as usize + n as usize + r as usize) + d as usize
    }

    pub fn name(self) -> &'static str {
        use LocSeVariant::*;
        match self {
            CenterOnly => "center_only",
            NeighborOnly => "neighbor_only",
            CenterNeighbor => "center_neighbor",
            CenterNeighborDist => "center_neighbor_dist",
            CenterNeighborRel => "center_neighbor_rel",
            Full => "full",
            Off => "off",
        }
    }
}

impl fmt::Display for LocSeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LocSeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LocSeVariant::ALL
            .into_iter()
            .find(|v| v.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown LocSE variant `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocSeConfig {
    pub variant: LocSeVariant,
    pub k: usize,
}

impl Default for LocSeConfig {
    fn default() -> Self {
        LocSeConfig { variant: LocSeVariant::Full, k: 16 }
    }
}

/// Raw geometric terms for each (centre, neighbour) pair.
///
/// `center` is Q×3 and `neighbors` Q×K×3; the result is Q×K×`raw_width`.
pub fn raw_position_encoding(center: &Tensor, neighbors: &Tensor, variant: LocSeVariant) -> Result<Tensor> {
    let (cs, ns) = (center.shape(), neighbors.shape());
    if cs.len() != 2 || cs[1] != 3 || ns.len() != 3 || ns[0] != cs[0] || ns[2] != 3 {
        return Err(Error::Shape(format!("centres {cs:?} and neighbours {ns:?}")));
    }
    let (q, k) = (ns[0], ns[1]);
    let (use_c, use_n, use_r, use_d) = variant.terms();
    let w = variant.raw_width();
    let mut out = Vec::with_capacity(q * k * w);
    for i in 0..q {
        let c = center.row(i);
        for j in 0..k {
            let nb = &neighbors.data()[(i * k + j) * 3..(i * k + j + 1) * 3];
            let rel = [c[0] - nb[0], c[1] - nb[1], c[2] - nb[2]];
            if use_c {
                out.extend_from_slice(c);
            }
            if use_n {
                out.extend_from_slice(nb);
            }
            if use_r {
                out.extend_from_slice(&rel);
            }
            if use_d {
                out.push((rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]).sqrt());
            }
        }
    }
    Tensor::new(vec![q, k, w], out)
}

/// Centre (Q×3) and gathered neighbour (Q×K×3) coordinate tensors.
pub fn neighborhood_tensors(positions: &[[f64; 3]], idx: &NeighborIndex) -> Result<(Tensor, Tensor)> {
    let q = idx.n_queries();
    if q != positions.len() {
        return Err(Error::Shape(format!("{q} neighbour rows for {} points", positions.len())));
    }
    let center = Tensor::new(vec![q, 3], positions.iter().flatten().copied().collect())?;
    let mut nb = Vec::with_capacity(idx.indices().len() * 3);
    for &j in idx.indices() {
        let p = positions.get(j).ok_or(Error::Index { index: j, len: positions.len() })?;
        nb.extend_from_slice(p);
    }
    Ok((center, Tensor::new(vec![q, idx.k(), 3], nb)?))
}

/// `r_i^k`: shared MLP (leaky ReLU) over the raw geometric terms.
pub fn relative_position_encoding(
    g: &mut Graph,
    center: &Tensor,
    neighbors: &Tensor,
    variant: LocSeVariant,
    mlp: &Linear,
) -> Result<Var> {
    if mlp.d_in != variant.raw_width() {
        return Err(Error::Config(format!(
            "LocSE variant {variant} produces {} values per neighbour but the MLP expects {}",
            variant.raw_width(),
            mlp.d_in
        )));
    }
    let raw = raw_position_encoding(center, neighbors, variant)?;
    let raw = g.constant(raw);
    g.shared_mlp(raw, mlp, Activation::leaky())
}

/// Augmented neighbour features `r_i^k ⊕ f_i^k` (Q×K×2d), or just the
/// gathered `f_i^k` when the variant is [`LocSeVariant::Off`].
///
/// `raw` is the precomputed [`raw_position_encoding`] for this neighbourhood,
/// so several units over the same neighbourhood can share it.
pub fn locse(
    g: &mut Graph,
    raw: Option<Var>,
    features: Var,
    idx: &NeighborIndex,
    mlp: Option<&Linear>,
) -> Result<Var> {
    let gathered = g.gather_neighbors(features, idx)?;
    match (raw, mlp) {
        (Some(raw), Some(mlp)) => {
            let d = g.value(features).last_dim();
            if mlp.d_out != d {
                return Err(Error::Config(format!(
                    "LocSE MLP width {} differs from the point-feature width {d}",
                    mlp.d_out
                )));
            }
            let r = g.shared_mlp(raw, mlp, Activation::leaky())?;
            g.concat(&[r, gathered])
        }
        (None, None) => Ok(gathered),
        _ => Err(Error::Config("LocSE needs both a raw encoding and an MLP, or neither".into())),
    }
}
