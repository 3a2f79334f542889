use super::ParamStore;
use crate::{Error, Result};

/// Per-epoch multiplicative learning-rate decay.
pub const LR_DECAY: f64 = 0.95;

/// Adam moments and schedule state.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zeroed moments matching `params`, default betas and epsilon.
    pub fn new(params: &ParamStore, lr: f64) -> AdamState {
        let zeros = || params.ids().map(|id| vec![0.0; params.get(id).len()]).collect::<Vec<_>>();
        AdamState { m: zeros(), v: zeros(), step: 0, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// One bias-corrected Adam update. `grads[i]` belongs to parameter `i`;
/// `None` counts as a zero gradient.
///
/// Nothing is modified if any gradient is non-finite.
pub fn adam_step(params: &mut ParamStore, grads: &[Option<&[f64]>], state: &mut AdamState) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::Shape(format!(
            "{} gradients and {} moment buffers for {} parameters",
            grads.len(),
            state.m.len(),
            params.len()
        )));
    }
    for (id, g) in params.ids().zip(grads) {
        if let Some(g) = g {
            if g.len() != params.get(id).len() {
                return Err(Error::Shape(format!("gradient length mismatch for `{}`", params.name(id))));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Optimization { param: params.name(id).to_string() });
            }
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps, lr) = (state.beta1, state.beta2, state.eps, state.lr);
    for (i, id) in params.ids().collect::<Vec<_>>().into_iter().enumerate() {
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        let p = params.get_mut(id).data_mut();
        for j in 0..p.len() {
            let g = grads[i].map_or(0.0, |g| g[j]);
            m[j] = b1 * m[j] + (1.0 - b1) * g;
            v[j] = b2 * v[j] + (1.0 - b2) * g * g;
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            p[j] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

/// End-of-epoch schedule: `lr ← lr · 0.95`.
pub fn lr_decay(state: &mut AdamState) {
    state.lr *= LR_DECAY;
}
