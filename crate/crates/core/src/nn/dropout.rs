use rand::Rng;

use super::{Mode, Tensor};

/// Inverted dropout. Returns the output and, in train mode with `p > 0`,
/// the per-unit scale mask (0 or `1 / (1 - p)`).
pub fn dropout<R: Rng + ?Sized>(x: &Tensor, p: f64, mode: Mode, rng: &mut R) -> (Tensor, Option<Vec<f64>>) {
    assert!((0.0..1.0).contains(&p), "dropout p must be in [0, 1)");
    if mode == Mode::Eval || p == 0.0 {
        return (x.clone(), None);
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..x.len()).map(|_| if rng.gen_bool(p) { 0.0 } else { keep }).collect();
    let out = x.values().iter().zip(&mask).map(|(v, m)| v * m).collect();
    (Tensor::from_vec(x.shape(), out), Some(mask))
}

pub fn dropout_backward(grad_out: &mut Tensor, mask: Option<&[f64]>) {
    if let Some(mask) = mask {
        grad_out.values_mut().iter_mut().zip(mask).for_each(|(g, m)| *g *= m);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_and_zero_p_are_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Tensor::from_vec(&[4], vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(dropout(&x, 0.1, Mode::Eval, &mut rng).0, x);
        assert_eq!(dropout(&x, 0.0, Mode::Train, &mut rng).0, x);
    }

    #[test]
    fn drop_rate_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = Tensor::filled(&[1_000_000], 1.0);
        let (y, _) = dropout(&x, 0.1, Mode::Train, &mut rng);
        let zeros = y.values().iter().filter(|&&v| v == 0.0).count() as f64 / 1e6;
        assert!((zeros - 0.1).abs() < 0.002, "zeroed fraction {zeros}");
        assert!(y.values().iter().all(|&v| v == 0.0 || (v - 1.0 / 0.9).abs() < 1e-15));
    }
}
