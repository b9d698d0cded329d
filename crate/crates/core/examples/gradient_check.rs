//! Central finite differences against the analytic convolution gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use goalrec::nn::{conv2d_backward, conv2d_forward, Tensor};

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

// Loss is sum(output * weights) so its gradient is `weights`.
fn loss(x: &Tensor, k: &Tensor, b: &Tensor, stride: usize, w: &Tensor) -> f64 {
    let y = conv2d_forward(x, k, b, stride).unwrap();
    y.values().iter().zip(w.values()).map(|(a, c)| a * c).sum()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let stride = 2;
    let x = random(&[2, 3, 7, 7], &mut rng);
    let mut k = random(&[4, 3, 3, 3], &mut rng);
    let b = random(&[4], &mut rng);
    let y = conv2d_forward(&x, &k, &b, stride).unwrap();
    let w = random(y.shape(), &mut rng);
    let grads = conv2d_backward(&w, &x, &k, stride, true).unwrap();

    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for i in 0..k.len() {
        let orig = k.values()[i];
        k.values_mut()[i] = orig + h;
        let up = loss(&x, &k, &b, stride, &w);
        k.values_mut()[i] = orig - h;
        let down = loss(&x, &k, &b, stride, &w);
        k.values_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let analytic = grads.kernels.values()[i];
        let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    println!(
        "kernel gradient: worst relative error {worst:.3e} over {} weights",
        k.len()
    );
}
