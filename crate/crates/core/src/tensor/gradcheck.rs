use super::{Graph, ParamStore, Tensor, Var};
use crate::{Error, Result};

/// Compares reverse-mode gradients against central finite differences.
///
/// `build` receives a fresh tape holding the parameters of `store` (as in
/// [`Graph::with_params`]) and one leaf per entry of `inputs`, and must return
/// a scalar. Every parameter and input scalar is perturbed by `±h`. The result
/// is the norm-wise relative error `‖fd − analytic‖ / max(‖fd‖, max|·|)`.
pub fn gradient_error<F>(store: &ParamStore, inputs: &[Tensor], h: f64, build: F) -> Result<f64>
where
    F: Fn(&mut Graph, &[Var]) -> Result<Var>,
{
    let eval = |store: &ParamStore, inputs: &[Tensor]| -> Result<(Graph, Vec<Var>, Var)> {
        let mut g = Graph::with_params(store);
        let vars: Vec<Var> = inputs.iter().map(|t| g.leaf(t.clone(), true)).collect();
        let out = build(&mut g, &vars)?;
        if g.value(out).len() != 1 {
            return Err(Error::Shape(format!("gradient check needs a scalar, got {:?}", g.shape(out))));
        }
        Ok((g, vars, out))
    };
    let scalar = |store: &ParamStore, inputs: &[Tensor]| -> Result<f64> {
        let (g, _, out) = eval(store, inputs)?;
        Ok(g.value(out).data()[0])
    };

    let (mut g, vars, out) = eval(store, inputs)?;
    g.backward(out)?;
    let mut analytic = Vec::new();
    for id in store.ids() {
        let n = store.get(id).len();
        analytic.push(g.grad(g.param(id)).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]));
    }
    for (v, t) in vars.iter().zip(inputs) {
        analytic.push(g.grad(*v).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; t.len()]));
    }

    let (mut num, mut diff, mut scale) = (0.0f64, 0.0f64, 0.0f64);
    let mut tally = |fd: f64, an: f64| {
        diff += (fd - an).powi(2);
        scale = scale.max(fd.abs()).max(an.abs());
        num += fd * fd;
    };
    let n_params = store.len();
    for (slot, id) in store.ids().enumerate() {
        for j in 0..store.get(id).len() {
            let mut plus = store.clone();
            plus.get_mut(id).data_mut()[j] += h;
            let mut minus = store.clone();
            minus.get_mut(id).data_mut()[j] -= h;
            let fd = (scalar(&plus, inputs)? - scalar(&minus, inputs)?) / (2.0 * h);
            tally(fd, analytic[slot][j]);
        }
    }
    for k in 0..inputs.len() {
        for j in 0..inputs[k].len() {
            let mut plus = inputs.to_vec();
            plus[k].data_mut()[j] += h;
            let mut minus = inputs.to_vec();
            minus[k].data_mut()[j] -= h;
            let fd = (scalar(store, &plus)? - scalar(store, &minus)?) / (2.0 * h);
            tally(fd, analytic[n_params + k][j]);
        }
    }
    Ok(diff.sqrt() / num.sqrt().max(scale).max(1e-12))
}

/// Contracts `x` to a scalar with fixed pseudo-random weights, so that every
/// output element contributes a distinct amount to the gradient.
pub fn random_contraction(g: &mut Graph, x: Var, seed: u64) -> Result<Var> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let shape = g.shape(x).to_vec();
    let n = shape.iter().product();
    let w = Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let w = g.constant(w);
    let p = g.mul(x, w)?;
    Ok(g.sum_all(p))
}
