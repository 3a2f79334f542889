use rand::Rng;

use super::Tensor;
use crate::{Error, Result};

/// Handle to a parameter inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named parameter tensors, in registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    /// Total scalar count across all parameters.
    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }

    /// Replaces every value with the same-named entry of `other`.
    pub fn load_from(&mut self, other: &ParamStore) -> Result<()> {
        for (i, name) in self.names.iter().enumerate() {
            let src = other
                .find(name)
                .map(|id| other.get(id))
                .ok_or_else(|| Error::Config(format!("checkpoint lacks parameter `{name}`")))?;
            if src.shape() != self.values[i].shape() {
                return Err(Error::Shape(format!(
                    "parameter `{name}`: checkpoint shape {:?}, model shape {:?}",
                    src.shape(),
                    self.values[i].shape()
                )));
            }
            self.values[i] = src.clone();
        }
        Ok(())
    }
}

/// Weights and bias of one shared affine map applied to every row.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// `d_in × d_out`
    pub weight: Tensor,
    /// `d_out`
    pub bias: Tensor,
}

impl MlpParams {
    /// Weights uniform in `±1/√d_in`, zero bias.
    pub fn init<R: Rng>(d_in: usize, d_out: usize, rng: &mut R) -> MlpParams {
        let scale = 1.0 / (d_in.max(1) as f64).sqrt();
        let w = (0..d_in * d_out).map(|_| rng.random_range(-scale..scale)).collect();
        MlpParams {
            weight: Tensor::new(vec![d_in, d_out], w).expect("consistent shape"),
            bias: Tensor::zeros(vec![d_out]),
        }
    }

    pub fn zeros(d_in: usize, d_out: usize) -> MlpParams {
        MlpParams { weight: Tensor::zeros(vec![d_in, d_out]), bias: Tensor::zeros(vec![d_out]) }
    }

    pub fn identity(d: usize) -> MlpParams {
        let mut w = Tensor::zeros(vec![d, d]);
        for i in 0..d {
            w.data_mut()[i * d + i] = 1.0;
        }
        MlpParams { weight: w, bias: Tensor::zeros(vec![d]) }
    }

    pub fn d_in(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn d_out(&self) -> usize {
        self.weight.shape()[1]
    }
}

/// A shared MLP registered in a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: Option<ParamId>,
    pub d_in: usize,
    pub d_out: usize,
}

impl Linear {
    pub fn register(store: &mut ParamStore, name: &str, p: MlpParams) -> Linear {
        let (d_in, d_out) = (p.d_in(), p.d_out());
        let weight = store.add(format!("{name}.weight"), p.weight);
        let bias = Some(store.add(format!("{name}.bias"), p.bias));
        Linear { weight, bias, d_in, d_out }
    }

    /// Registers only the weight matrix; the map has no bias term.
    pub fn register_unbiased(store: &mut ParamStore, name: &str, p: MlpParams) -> Linear {
        let (d_in, d_out) = (p.d_in(), p.d_out());
        let weight = store.add(format!("{name}.weight"), p.weight);
        Linear { weight, bias: None, d_in, d_out }
    }

    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, d_in: usize, d_out: usize, rng: &mut R) -> Linear {
        Self::register(store, name, MlpParams::init(d_in, d_out, rng))
    }
}
