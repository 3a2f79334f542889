//! Reverse-mode tape.
//!
//! A [`Graph`] records every operation eagerly: values are computed when the
//! op is added, and [`Graph::backward`] walks the tape in reverse to fill the
//! gradient slot of every node that depends on a differentiable leaf.
//! Parameters from a [`ParamStore`] are copied in as the first nodes, so
//! `ParamId(i)` and node `i` coincide.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::borrow::Cow;

use super::{gemm, Linear, ParamId, ParamStore, Tensor, View};
use crate::spatial::NeighborIndex;
use crate::{Error, Result};

/// Negative slope of the leaky ReLU unless configured otherwise.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    None,
    LeakyRelu(f64),
}

impl Activation {
    pub fn leaky() -> Activation {
        Activation::LeakyRelu(DEFAULT_LEAKY_SLOPE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduce {
    Sum,
    Mean,
    Max,
}

#[derive(Debug)]
enum Op {
    Leaf,
    Linear { x: Var, w: Var, b: Option<Var>, act: Activation },
    LeakyRelu { x: Var, slope: f64 },
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Concat { parts: Vec<Var> },
    Gather { x: Var, idx: Vec<usize> },
    Softmax { x: Var, outer: usize, len: usize, inner: usize },
    Reduce { x: Var, kind: Reduce, outer: usize, len: usize, inner: usize, argmax: Vec<usize> },
    Dropout { x: Var, mask: Vec<f64> },
    CrossEntropy { logits: Var, probs: Vec<f64>, labels: Vec<usize>, weights: Vec<f64>, total: f64 },
    SumAll(Var),
}

struct Node {
    value: Tensor,
    op: Op,
    tracked: bool,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

fn split_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let len = shape[axis];
    let inner = shape[axis + 1..].iter().product();
    (outer, len, inner)
}

/// `e^x` for every element, to within a couple of ulps.
///
/// Written as straight-line arithmetic on each lane so the loop vectorises;
/// inputs below the underflow threshold give exactly 0.
pub(crate) fn exp_in_place(xs: &mut [f64]) {
    const LOG2E: f64 = std::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    // Adding 1.5·2^52 rounds to the nearest integer, which then sits in the
    // low mantissa bits.
    const SHIFTER: f64 = 6_755_399_441_055_744.0;
    const C: [f64; 13] = [
        1.0,
        1.0,
        1.0 / 2.0,
        1.0 / 6.0,
        1.0 / 24.0,
        1.0 / 120.0,
        1.0 / 720.0,
        1.0 / 5040.0,
        1.0 / 40320.0,
        1.0 / 362_880.0,
        1.0 / 3_628_800.0,
        1.0 / 39_916_800.0,
        1.0 / 479_001_600.0,
    ];
    for v in xs.iter_mut() {
        let x = v.clamp(-708.0, 709.0);
        let shifted = x * LOG2E + SHIFTER;
        let n = shifted - SHIFTER;
        let r = (x - n * LN2_HI) - n * LN2_LO;
        let mut p = C[12];
        for c in C[..12].iter().rev() {
            p = p * r + c;
        }
        let k = shifted.to_bits().wrapping_sub(SHIFTER.to_bits()) as i64;
        let scale = f64::from_bits(((k + 1023) as u64) << 52);
        let e = p * scale;
        *v = if *v < -708.0 { 0.0 } else if *v > 709.0 { f64::INFINITY } else { e };
    }
}

fn accumulate(slot: &mut Option<Vec<f64>>, len: usize) -> &mut Vec<f64> {
    slot.get_or_insert_with(|| vec![0.0; len])
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    /// A tape whose first nodes are the (differentiable) parameters of `store`.
    pub fn with_params(store: &ParamStore) -> Graph {
        let mut g = Graph { nodes: Vec::with_capacity(store.len() + 64) };
        for id in store.ids() {
            g.leaf(store.get(id).clone(), true);
        }
        g
    }

    pub fn param(&self, id: ParamId) -> Var {
        debug_assert!(id.0 < self.nodes.len());
        Var(id.0)
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        let value = value.requires_grad(requires_grad);
        self.push(value, Op::Leaf, requires_grad)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    fn push(&mut self, value: Tensor, op: Op, tracked: bool) -> Var {
        let value = value.requires_grad(tracked);
        self.nodes.push(Node { value, op, tracked });
        Var(self.nodes.len() - 1)
    }

    fn tracked(&self, v: Var) -> bool {
        self.nodes[v.0].tracked
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    /// Gradient of the last [`Graph::backward`] root with respect to `v`.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.nodes[v.0].value.grad()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Shared MLP: the same affine map (plus activation) on every row of `x`.
    pub fn linear(&mut self, x: Var, w: Var, b: Option<Var>, act: Activation) -> Result<Var> {
        let (xs, ws) = (self.shape(x), self.shape(w));
        let bias_ok = b.is_none_or(|b| ws.len() == 2 && self.shape(b) == [ws[1]]);
        if ws.len() != 2 || xs.last() != Some(&ws[0]) || !bias_ok {
            let bs = b.map(|b| self.shape(b).to_vec());
            return Err(Error::Shape(format!("shared MLP: input {xs:?}, weight {ws:?}, bias {bs:?}")));
        }
        let (d_in, d_out) = (ws[0], ws[1]);
        let rows = self.value(x).len() / d_in.max(1);
        let mut out = vec![0.0; rows * d_out];
        if let Some(b) = b {
            let bias = self.value(b).data();
            for row in out.chunks_exact_mut(d_out) {
                row.copy_from_slice(bias);
            }
        }
        gemm(rows, d_in, d_out, View::rm(self.value(x).data(), d_in), View::rm(self.value(w).data(), d_out), 1.0, &mut out);
        if let Activation::LeakyRelu(s) = act {
            out.iter_mut().for_each(|v| {
                if *v < 0.0 {
                    *v *= s
                }
            });
        }
        let mut shape = xs.to_vec();
        *shape.last_mut().unwrap() = d_out;
        let tracked = self.tracked(x) || self.tracked(w) || b.is_some_and(|b| self.tracked(b));
        Ok(self.push(Tensor::new(shape, out)?, Op::Linear { x, w, b, act }, tracked))
    }

    /// [`Graph::linear`] with a registered [`Linear`].
    pub fn shared_mlp(&mut self, x: Var, layer: &Linear, act: Activation) -> Result<Var> {
        self.linear(x, Var(layer.weight.0), layer.bias.map(|b| Var(b.0)), act)
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Var {
        let mut t = self.value(x).clone();
        t.clear_grad();
        t.data_mut().iter_mut().for_each(|v| {
            if *v < 0.0 {
                *v *= slope
            }
        });
        let tracked = self.tracked(x);
        self.push(t, Op::LeakyRelu { x, slope }, tracked)
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::Shape(format!("{what}: {:?} vs {:?}", self.shape(a), self.shape(b))));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "add")?;
        let data = self.value(a).data().iter().zip(self.value(b).data()).map(|(x, y)| x + y).collect();
        let t = Tensor::new(self.shape(a).to_vec(), data)?;
        let tracked = self.tracked(a) || self.tracked(b);
        Ok(self.push(t, Op::Add(a, b), tracked))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "mul")?;
        let data = self.value(a).data().iter().zip(self.value(b).data()).map(|(x, y)| x * y).collect();
        let t = Tensor::new(self.shape(a).to_vec(), data)?;
        let tracked = self.tracked(a) || self.tracked(b);
        Ok(self.push(t, Op::Mul(a, b), tracked))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let data = self.value(x).data().iter().map(|v| v * c).collect();
        let t = Tensor::new(self.shape(x).to_vec(), data).expect("same shape");
        let tracked = self.tracked(x);
        self.push(t, Op::Scale(x, c), tracked)
    }

    /// Concatenation along the last axis; leading axes must agree.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or_else(|| Error::Shape("concat of nothing".into()))?;
        let lead = &self.shape(first)[..self.shape(first).len().saturating_sub(1)];
        for &p in parts {
            let s = self.shape(p);
            if s.is_empty() || &s[..s.len() - 1] != lead {
                return Err(Error::Shape(format!("concat: {:?} vs {:?}", self.shape(first), s)));
            }
        }
        let widths: Vec<usize> = parts.iter().map(|&p| self.value(p).last_dim()).collect();
        let total: usize = widths.iter().sum();
        let rows = self.value(first).rows();
        let mut out = vec![0.0; rows * total];
        let mut offset = 0;
        for (&p, &w) in parts.iter().zip(&widths) {
            let src = self.value(p).data();
            for r in 0..rows {
                out[r * total + offset..r * total + offset + w].copy_from_slice(&src[r * w..(r + 1) * w]);
            }
            offset += w;
        }
        let mut shape = lead.to_vec();
        shape.push(total);
        let tracked = parts.iter().any(|&p| self.tracked(p));
        Ok(self.push(Tensor::new(shape, out)?, Op::Concat { parts: parts.to_vec() }, tracked))
    }

    /// Rows of a 2-D `x` picked by `idx`, reshaped to `lead ++ [d]`.
    pub fn gather_rows(&mut self, x: Var, idx: &[usize], lead: &[usize]) -> Result<Var> {
        let xv = self.value(x);
        if xv.shape().len() != 2 {
            return Err(Error::Shape(format!("gather expects a matrix, got {:?}", xv.shape())));
        }
        if lead.iter().product::<usize>() != idx.len() {
            return Err(Error::Shape(format!("gather: {} indices for leading shape {lead:?}", idx.len())));
        }
        let (n, d) = (xv.shape()[0], xv.shape()[1]);
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::Index { index: bad, len: n });
        }
        let src = xv.data();
        let mut out = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            out.extend_from_slice(&src[i * d..(i + 1) * d]);
        }
        let mut shape = lead.to_vec();
        shape.push(d);
        let tracked = self.tracked(x);
        Ok(self.push(Tensor::new(shape, out)?, Op::Gather { x, idx: idx.to_vec() }, tracked))
    }

    /// `out[q, k, :] = features[idx[q, k], :]`.
    pub fn gather_neighbors(&mut self, features: Var, idx: &NeighborIndex) -> Result<Var> {
        self.gather_rows(features, idx.indices(), &[idx.n_queries(), idx.k()])
    }

    /// Softmax along `axis`, stabilised by subtracting the slice maximum.
    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() || shape[axis] == 0 {
            return Err(Error::Shape(format!("softmax over axis {axis} of {shape:?}")));
        }
        let (outer, len, inner) = split_axis(&shape, axis);
        let src = self.value(x).data();
        let mut out = src.to_vec();
        let mut max = vec![0.0; inner];
        let mut total = vec![0.0; inner];
        for block in out.chunks_exact_mut(len * inner) {
            max.copy_from_slice(&block[..inner]);
            for row in block.chunks_exact(inner).skip(1) {
                for (m, v) in max.iter_mut().zip(row) {
                    *m = m.max(*v);
                }
            }
            for row in block.chunks_exact_mut(inner) {
                for (v, m) in row.iter_mut().zip(&max) {
                    *v -= m;
                }
            }
            exp_in_place(block);
            total.fill(0.0);
            for row in block.chunks_exact(inner) {
                for (t, v) in total.iter_mut().zip(row) {
                    *t += v;
                }
            }
            for row in block.chunks_exact_mut(inner) {
                for (v, t) in row.iter_mut().zip(&total) {
                    *v /= t;
                }
            }
        }
        let tracked = self.tracked(x);
        Ok(self.push(Tensor::new(shape, out)?, Op::Softmax { x, outer, len, inner }, tracked))
    }

    pub fn softmax_lastaxis(&mut self, x: Var) -> Result<Var> {
        let axis = self.shape(x).len().checked_sub(1).ok_or_else(|| Error::Shape("softmax of a scalar".into()))?;
        self.softmax(x, axis)
    }

    /// Sum, mean or max along `axis`, which is removed from the shape.
    pub fn reduce(&mut self, x: Var, axis: usize, kind: Reduce) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() || shape[axis] == 0 {
            return Err(Error::Shape(format!("reduce over axis {axis} of {shape:?}")));
        }
        let (outer, len, inner) = split_axis(&shape, axis);
        let src = self.value(x).data();
        let mut out = vec![0.0; outer * inner];
        let mut argmax = Vec::new();
        if kind == Reduce::Max {
            argmax = vec![0; outer * inner];
        }
        for (o, block) in src.chunks_exact(len * inner).enumerate() {
            let acc = &mut out[o * inner..(o + 1) * inner];
            match kind {
                Reduce::Sum | Reduce::Mean => {
                    for row in block.chunks_exact(inner) {
                        for (a, v) in acc.iter_mut().zip(row) {
                            *a += v;
                        }
                    }
                    if kind == Reduce::Mean {
                        acc.iter_mut().for_each(|a| *a /= len as f64);
                    }
                }
                Reduce::Max => {
                    let arg = &mut argmax[o * inner..(o + 1) * inner];
                    acc.copy_from_slice(&block[..inner]);
                    for (l, row) in block.chunks_exact(inner).enumerate().skip(1) {
                        for ((a, best), v) in acc.iter_mut().zip(arg.iter_mut()).zip(row) {
                            if *v > *a {
                                *a = *v;
                                *best = l;
                            }
                        }
                    }
                }
            }
        }
        let mut out_shape = shape.clone();
        out_shape.remove(axis);
        let tracked = self.tracked(x);
        Ok(self.push(Tensor::new(out_shape, out)?, Op::Reduce { x, kind, outer, len, inner, argmax }, tracked))
    }

    /// Inverted dropout: in training mode each entry is zeroed with
    /// probability `rate` and survivors are scaled by `1/(1-rate)`; otherwise
    /// the identity.
    pub fn dropout(&mut self, x: Var, rate: f64, train: bool, seed: u64) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Config(format!("dropout rate must lie in [0, 1), got {rate}")));
        }
        if !train || rate == 0.0 {
            return Ok(x);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keep = 1.0 / (1.0 - rate);
        let mask: Vec<f64> =
            (0..self.value(x).len()).map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep }).collect();
        let data = self.value(x).data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        let t = Tensor::new(self.shape(x).to_vec(), data)?;
        let tracked = self.tracked(x);
        Ok(self.push(t, Op::Dropout { x, mask }, tracked))
    }

    /// Mean (optionally class-weighted) negative log-likelihood of `labels`
    /// under row-wise softmax of `logits` (N×C). Returns a scalar node.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[u32], class_weights: Option<&[f64]>) -> Result<Var> {
        let shape = self.shape(logits).to_vec();
        if shape.len() != 2 || shape[0] != labels.len() || shape[0] == 0 {
            return Err(Error::Shape(format!("cross entropy: logits {shape:?} for {} labels", labels.len())));
        }
        let c = shape[1];
        if let Some(w) = class_weights {
            if w.len() != c {
                return Err(Error::Shape(format!("{} class weights for {c} classes", w.len())));
            }
        }
        if let Some((row, &l)) = labels.iter().enumerate().find(|(_, &l)| l as usize >= c) {
            return Err(Error::Data(format!("label {l} in row {row} is outside [0, {c})")));
        }
        let z = self.value(logits).data();
        let mut probs = vec![0.0; z.len()];
        let mut weights = Vec::with_capacity(labels.len());
        let mut loss = 0.0;
        let mut total = 0.0;
        for (r, &l) in labels.iter().enumerate() {
            let row = &z[r * c..(r + 1) * c];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
            let lse = max + sum.ln();
            for j in 0..c {
                probs[r * c + j] = (row[j] - lse).exp();
            }
            let w = class_weights.map_or(1.0, |w| w[l as usize]);
            weights.push(w);
            total += w;
            loss += w * (lse - row[l as usize]);
        }
        if total <= 0.0 {
            return Err(Error::Data("class weights of the present labels sum to zero".into()));
        }
        let labels = labels.iter().map(|&l| l as usize).collect();
        let tracked = self.tracked(logits);
        Ok(self.push(
            Tensor::scalar(loss / total),
            Op::CrossEntropy { logits, probs, labels, weights, total },
            tracked,
        ))
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        let tracked = self.tracked(x);
        self.push(Tensor::scalar(s), Op::SumAll(x), tracked)
    }

    /// Back-propagates from the scalar `root`, filling gradient slots of every
    /// tracked node. Previous gradients are discarded.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        if self.value(root).len() != 1 {
            return Err(Error::Shape(format!("backward needs a scalar root, got {:?}", self.shape(root))));
        }
        let n = root.0 + 1;
        let mut grads: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(vec![1.0]);
        for i in (0..n).rev() {
            let Some(gy) = grads[i].take() else { continue };
            if !self.nodes[i].tracked {
                continue;
            }
            self.backprop_node(i, &gy, &mut grads);
            grads[i] = Some(gy);
        }
        for (node, g) in self.nodes.iter_mut().zip(grads) {
            node.value.clear_grad();
            if let (true, Some(g)) = (node.tracked, g) {
                node.value.set_grad(g)?;
            }
        }
        Ok(())
    }

    fn backprop_node(&self, i: usize, gy: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[i];
        let len = |v: Var| self.nodes[v.0].value.len();
        match &node.op {
            Op::Leaf => {}
            Op::Linear { x, w, b, act } => {
                let (d_in, d_out) = (self.shape(*w)[0], self.shape(*w)[1]);
                let rows = gy.len() / d_out.max(1);
                let dz: Cow<[f64]> = match act {
                    Activation::None => Cow::Borrowed(gy),
                    Activation::LeakyRelu(s) => Cow::Owned(
                        gy.iter().zip(node.value.data()).map(|(g, y)| if *y > 0.0 { *g } else { g * s }).collect(),
                    ),
                };
                if self.tracked(*x) {
                    let dx = accumulate(&mut grads[x.0], len(*x));
                    gemm(rows, d_out, d_in, View::rm(&dz, d_out), View::rm_t(self.value(*w).data(), d_out), 1.0, dx);
                }
                if self.tracked(*w) {
                    let dw = accumulate(&mut grads[w.0], len(*w));
                    gemm(d_in, rows, d_out, View::rm_t(self.value(*x).data(), d_in), View::rm(&dz, d_out), 1.0, dw);
                }
                if let Some(b) = b.filter(|b| self.tracked(*b)) {
                    let db = accumulate(&mut grads[b.0], d_out);
                    for row in dz.chunks_exact(d_out) {
                        for (acc, v) in db.iter_mut().zip(row) {
                            *acc += v;
                        }
                    }
                }
            }
            Op::LeakyRelu { x, slope } => {
                if self.tracked(*x) {
                    let dx = accumulate(&mut grads[x.0], len(*x));
                    for ((acc, g), y) in dx.iter_mut().zip(gy).zip(node.value.data()) {
                        *acc += if *y > 0.0 { *g } else { g * slope };
                    }
                }
            }
            Op::Add(a, b) => {
                for v in [a, b] {
                    if self.tracked(*v) {
                        let d = accumulate(&mut grads[v.0], gy.len());
                        d.iter_mut().zip(gy).for_each(|(acc, g)| *acc += g);
                    }
                }
            }
            Op::Mul(a, b) => {
                for (v, other) in [(a, b), (b, a)] {
                    if self.tracked(*v) {
                        let o = self.value(*other).data();
                        let d = accumulate(&mut grads[v.0], gy.len());
                        for ((acc, g), ov) in d.iter_mut().zip(gy).zip(o) {
                            *acc += g * ov;
                        }
                    }
                }
            }
            Op::Scale(x, c) => {
                if self.tracked(*x) {
                    let d = accumulate(&mut grads[x.0], gy.len());
                    d.iter_mut().zip(gy).for_each(|(acc, g)| *acc += g * c);
                }
            }
            Op::Concat { parts } => {
                let total = node.value.last_dim();
                let rows = node.value.rows();
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).last_dim();
                    if self.tracked(p) {
                        let d = accumulate(&mut grads[p.0], rows * w);
                        for r in 0..rows {
                            let src = &gy[r * total + offset..r * total + offset + w];
                            for (acc, g) in d[r * w..(r + 1) * w].iter_mut().zip(src) {
                                *acc += g;
                            }
                        }
                    }
                    offset += w;
                }
            }
            Op::Gather { x, idx } => {
                if self.tracked(*x) {
                    let d = self.value(*x).last_dim();
                    let dx = accumulate(&mut grads[x.0], len(*x));
                    for (j, &src) in idx.iter().enumerate() {
                        for (acc, g) in dx[src * d..(src + 1) * d].iter_mut().zip(&gy[j * d..(j + 1) * d]) {
                            *acc += g;
                        }
                    }
                }
            }
            Op::Softmax { x, outer, len: l, inner } => {
                if self.tracked(*x) {
                    let y = node.value.data();
                    let dx = accumulate(&mut grads[x.0], y.len());
                    let n = l * inner;
                    let mut dot = vec![0.0; *inner];
                    for o in 0..*outer {
                        let (yb, gb) = (&y[o * n..(o + 1) * n], &gy[o * n..(o + 1) * n]);
                        dot.fill(0.0);
                        for (yr, gr) in yb.chunks_exact(*inner).zip(gb.chunks_exact(*inner)) {
                            for ((d, yv), gv) in dot.iter_mut().zip(yr).zip(gr) {
                                *d += yv * gv;
                            }
                        }
                        let db = &mut dx[o * n..(o + 1) * n];
                        for ((dr, yr), gr) in db.chunks_exact_mut(*inner).zip(yb.chunks_exact(*inner)).zip(gb.chunks_exact(*inner)) {
                            for (((a, yv), gv), d) in dr.iter_mut().zip(yr).zip(gr).zip(&dot) {
                                *a += yv * (gv - d);
                            }
                        }
                    }
                }
            }
            Op::Reduce { x, kind, outer, len: l, inner, argmax } => {
                if self.tracked(*x) {
                    let n = l * inner;
                    let dx = accumulate(&mut grads[x.0], outer * n);
                    for o in 0..*outer {
                        let g = &gy[o * inner..(o + 1) * inner];
                        let db = &mut dx[o * n..(o + 1) * n];
                        match kind {
                            Reduce::Sum | Reduce::Mean => {
                                let div = if *kind == Reduce::Mean { *l as f64 } else { 1.0 };
                                for row in db.chunks_exact_mut(*inner) {
                                    for (a, gv) in row.iter_mut().zip(g) {
                                        *a += gv / div;
                                    }
                                }
                            }
                            Reduce::Max => {
                                for (i, gv) in g.iter().enumerate() {
                                    db[argmax[o * inner + i] * inner + i] += gv;
                                }
                            }
                        }
                    }
                }
            }
            Op::Dropout { x, mask } => {
                if self.tracked(*x) {
                    let dx = accumulate(&mut grads[x.0], mask.len());
                    for ((acc, g), m) in dx.iter_mut().zip(gy).zip(mask) {
                        *acc += g * m;
                    }
                }
            }
            Op::CrossEntropy { logits, probs, labels, weights, total } => {
                if self.tracked(*logits) {
                    let c = probs.len() / labels.len();
                    let dz = accumulate(&mut grads[logits.0], probs.len());
                    for (r, (&l, &w)) in labels.iter().zip(weights).enumerate() {
                        let scale = gy[0] * w / total;
                        for j in 0..c {
                            let onehot = if j == l { 1.0 } else { 0.0 };
                            dz[r * c + j] += scale * (probs[r * c + j] - onehot);
                        }
                    }
                }
            }
            Op::SumAll(x) => {
                if self.tracked(*x) {
                    let dx = accumulate(&mut grads[x.0], len(*x));
                    dx.iter_mut().for_each(|acc| *acc += gy[0]);
                }
            }
        }
    }
}
