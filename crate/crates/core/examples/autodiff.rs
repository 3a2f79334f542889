//! Builds a two-layer perceptron on the tape, checks its gradients against
//! finite differences and takes a few Adam steps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use randla::tensor::gradcheck::gradient_error;
use randla::tensor::{adam_step, Activation, AdamState, Graph, Linear, ParamStore, Tensor};

fn main() -> randla::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut params = ParamStore::new();
    let hidden = Linear::new(&mut params, "hidden", 2, 8, &mut rng);
    let out = Linear::new(&mut params, "out", 8, 2, &mut rng);

    // Two interleaved half-moons, labelled by side.
    let n = 64;
    let xs: Vec<f64> = (0..n)
        .flat_map(|i| {
            let t = i as f64 / n as f64 * std::f64::consts::PI;
            if i % 2 == 0 { [t.cos(), t.sin()] } else { [1.0 - t.cos(), 0.5 - t.sin()] }
        })
        .collect();
    let labels: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
    let x = Tensor::new(vec![n, 2], xs)?;

    let loss = |g: &mut Graph, x| -> randla::Result<_> {
        let h = g.shared_mlp(x, &hidden, Activation::leaky())?;
        let z = g.shared_mlp(h, &out, Activation::None)?;
        g.softmax_cross_entropy(z, &labels, None)
    };

    let err = gradient_error(&params, std::slice::from_ref(&x), 1e-6, |g, v| loss(g, v[0]))?;
    println!("relative gradient error vs finite differences: {err:.2e}");

    let mut adam = AdamState::new(&params, 0.05);
    for step in 0..=200 {
        let mut g = Graph::with_params(&params);
        let input = g.constant(x.clone());
        let l = loss(&mut g, input)?;
        g.backward(l)?;
        if step % 50 == 0 {
            println!("step {step:>3}  loss {:.4}", g.value(l).data()[0]);
        }
        let grads: Vec<Option<&[f64]>> = params.ids().map(|id| g.grad(g.param(id))).collect();
        adam_step(&mut params, &grads, &mut adam)?;
    }
    Ok(())
}
