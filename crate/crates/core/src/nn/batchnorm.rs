//! Per-channel batch normalization over (B, H, W).

use super::{Mode, NnError, Tensor};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Tensor,
    pub beta: Tensor,
    pub running_mean: Tensor,
    pub running_var: Tensor,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            gamma: Tensor::filled(&[channels], 1.0),
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::filled(&[channels], 1.0),
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }
}

/// Saved state for the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache {
    pub mode: Mode,
    pub xhat: Vec<f64>,
    pub inv_std: Vec<f64>,
}

fn dims(op: &'static str, x: &Tensor, channels: usize) -> Result<(usize, usize), NnError> {
    match *x.shape() {
        [b, c, h, w] if c == channels => Ok((b, h * w)),
        _ => Err(NnError::Shape {
            op,
            expected: vec![0, channels, 0, 0],
            got: x.shape().to_vec(),
        }),
    }
}

/// Train mode normalizes by batch statistics and updates the running
/// estimates (unbiased variance); eval mode uses the running estimates.
pub fn batchnorm_forward(x: &Tensor, bn: &mut BatchNorm, mode: Mode) -> Result<(Tensor, BnCache), NnError> {
    let c = bn.channels();
    let (b, plane) = dims("batchnorm_forward", x, c)?;
    if mode == Mode::Train && b < 2 {
        return Err(NnError::BatchTooSmall(b));
    }
    let m = (b * plane) as f64;
    let xs = x.values();
    let mut inv_std = vec![0.0; c];
    let mut mean = vec![0.0; c];
    for ch in 0..c {
        let (mu, var) = match mode {
            Mode::Train => {
                let mut sum = 0.0;
                for i in 0..b {
                    sum += xs[(i * c + ch) * plane..(i * c + ch + 1) * plane].iter().sum::<f64>();
                }
                let mu = sum / m;
                let mut sq = 0.0;
                for i in 0..b {
                    sq += xs[(i * c + ch) * plane..(i * c + ch + 1) * plane]
                        .iter()
                        .map(|v| (v - mu) * (v - mu))
                        .sum::<f64>();
                }
                let var = sq / m;
                let rm = &mut bn.running_mean.values_mut()[ch];
                *rm = (1.0 - BN_MOMENTUM) * *rm + BN_MOMENTUM * mu;
                let unbiased = if m > 1.0 { sq / (m - 1.0) } else { var };
                let rv = &mut bn.running_var.values_mut()[ch];
                *rv = (1.0 - BN_MOMENTUM) * *rv + BN_MOMENTUM * unbiased;
                (mu, var)
            }
            Mode::Eval => (bn.running_mean.values()[ch], bn.running_var.values()[ch]),
        };
        mean[ch] = mu;
        inv_std[ch] = 1.0 / (var + BN_EPS).sqrt();
    }
    let mut xhat = vec![0.0; xs.len()];
    let mut out = vec![0.0; xs.len()];
    let (gamma, beta) = (bn.gamma.values(), bn.beta.values());
    for i in 0..b {
        for ch in 0..c {
            let r = (i * c + ch) * plane..(i * c + ch + 1) * plane;
            for ((xh, y), v) in xhat[r.clone()].iter_mut().zip(&mut out[r.clone()]).zip(&xs[r]) {
                *xh = (v - mean[ch]) * inv_std[ch];
                *y = gamma[ch] * *xh + beta[ch];
            }
        }
    }
    Ok((Tensor::from_vec(x.shape(), out), BnCache { mode, xhat, inv_std }))
}

/// Returns (grad_x, grad_gamma, grad_beta).
pub fn batchnorm_backward(
    grad_out: &Tensor,
    cache: &BnCache,
    bn: &BatchNorm,
) -> Result<(Tensor, Tensor, Tensor), NnError> {
    let c = bn.channels();
    let (b, plane) = dims("batchnorm_backward", grad_out, c)?;
    if grad_out.len() != cache.xhat.len() {
        return Err(NnError::Shape {
            op: "batchnorm_backward",
            expected: vec![cache.xhat.len()],
            got: vec![grad_out.len()],
        });
    }
    let g = grad_out.values();
    let m = (b * plane) as f64;
    let mut gg = vec![0.0; c];
    let mut gb = vec![0.0; c];
    for i in 0..b {
        for ch in 0..c {
            let r = (i * c + ch) * plane..(i * c + ch + 1) * plane;
            for (gv, xh) in g[r.clone()].iter().zip(&cache.xhat[r]) {
                gb[ch] += gv;
                gg[ch] += gv * xh;
            }
        }
    }
    let gamma = bn.gamma.values();
    let mut gx = vec![0.0; g.len()];
    for i in 0..b {
        for ch in 0..c {
            let r = (i * c + ch) * plane..(i * c + ch + 1) * plane;
            let scale = gamma[ch] * cache.inv_std[ch];
            let dst = gx[r.clone()].iter_mut().zip(&g[r.clone()]).zip(&cache.xhat[r]);
            match cache.mode {
                Mode::Train => {
                    for ((d, gv), xh) in dst {
                        *d = scale * (gv - gb[ch] / m - xh * gg[ch] / m);
                    }
                }
                Mode::Eval => {
                    for ((d, gv), _) in dst {
                        *d = scale * gv;
                    }
                }
            }
        }
    }
    Ok((
        Tensor::from_vec(grad_out.shape(), gx),
        Tensor::from_vec(&[c], gg),
        Tensor::from_vec(&[c], gb),
    ))
}
