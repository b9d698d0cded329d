//! Dense head with softmax cross-entropy.

use super::{NnError, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `[out, in]`
    pub weights: Tensor,
    pub bias: Tensor,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[0]
    }

    /// `[B, in]` features to `[B, out]` logits.
    pub fn forward(&self, features: &Tensor) -> Result<Tensor, NnError> {
        let (n_in, n_out) = (self.inputs(), self.outputs());
        let b = match *features.shape() {
            [b, i] if i == n_in => b,
            _ => {
                return Err(NnError::Shape {
                    op: "dense_forward",
                    expected: vec![0, n_in],
                    got: features.shape().to_vec(),
                })
            }
        };
        let (w, bias) = (self.weights.values(), self.bias.values());
        let mut out = vec![0.0; b * n_out];
        for (f, o) in features.values().chunks(n_in).zip(out.chunks_mut(n_out)) {
            for (k, ov) in o.iter_mut().enumerate() {
                *ov = bias[k]
                    + w[k * n_in..(k + 1) * n_in]
                        .iter()
                        .zip(f)
                        .map(|(a, b)| a * b)
                        .sum::<f64>();
            }
        }
        Ok(Tensor::from_vec(&[b, n_out], out))
    }
}

/// Max-subtracted softmax of one logit row.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone)]
pub struct Xent {
    /// Mean negative log-likelihood over the batch.
    pub loss: f64,
    pub probabilities: Tensor,
    pub grad_logits: Tensor,
}

pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<Xent, NnError> {
    let &[b, k] = logits.shape() else {
        return Err(NnError::Shape {
            op: "softmax_cross_entropy",
            expected: vec![labels.len(), 0],
            got: logits.shape().to_vec(),
        });
    };
    if b != labels.len() {
        return Err(NnError::Shape {
            op: "softmax_cross_entropy",
            expected: vec![labels.len(), k],
            got: logits.shape().to_vec(),
        });
    }
    if logits.values().iter().any(|v| !v.is_finite()) {
        return Err(NnError::NonFinite("softmax_cross_entropy"));
    }
    let mut probs = Vec::with_capacity(b * k);
    let mut grad = Vec::with_capacity(b * k);
    let mut loss = 0.0;
    for (row, &label) in logits.values().chunks(k).zip(labels) {
        if label >= k {
            return Err(NnError::Label { label, classes: k });
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        loss -= row[label] - max - log_sum;
        for (j, z) in row.iter().enumerate() {
            let p = (z - max - log_sum).exp();
            probs.push(p);
            grad.push((p - if j == label { 1.0 } else { 0.0 }) / b as f64);
        }
    }
    Ok(Xent {
        loss: loss / b as f64,
        probabilities: Tensor::from_vec(&[b, k], probs),
        grad_logits: Tensor::from_vec(&[b, k], grad),
    })
}

#[derive(Debug, Clone)]
pub struct DenseXent {
    pub loss: f64,
    pub probabilities: Tensor,
    pub grad_weights: Tensor,
    pub grad_bias: Tensor,
    pub grad_features: Tensor,
}

/// Dense layer, softmax and mean cross-entropy in one pass, with gradients.
pub fn dense_softmax_xent(features: &Tensor, dense: &Dense, labels: &[usize]) -> Result<DenseXent, NnError> {
    if features.values().iter().any(|v| !v.is_finite()) {
        return Err(NnError::NonFinite("dense_softmax_xent"));
    }
    let logits = dense.forward(features)?;
    let Xent {
        loss,
        probabilities,
        grad_logits,
    } = softmax_cross_entropy(&logits, labels)?;
    let (n_in, n_out) = (dense.inputs(), dense.outputs());
    let mut gw = vec![0.0; n_out * n_in];
    let mut gb = vec![0.0; n_out];
    let mut gf = vec![0.0; features.len()];
    let w = dense.weights.values();
    for ((f, g), gfi) in features
        .values()
        .chunks(n_in)
        .zip(grad_logits.values().chunks(n_out))
        .zip(gf.chunks_mut(n_in))
    {
        for (k, &gk) in g.iter().enumerate() {
            gb[k] += gk;
            let row = &mut gw[k * n_in..(k + 1) * n_in];
            for ((r, fv), (d, wv)) in row
                .iter_mut()
                .zip(f)
                .zip(gfi.iter_mut().zip(&w[k * n_in..(k + 1) * n_in]))
            {
                *r += gk * fv;
                *d += gk * wv;
            }
        }
    }
    Ok(DenseXent {
        loss,
        probabilities,
        grad_weights: Tensor::from_vec(&[n_out, n_in], gw),
        grad_bias: Tensor::from_vec(&[n_out], gb),
        grad_features: Tensor::from_vec(features.shape(), gf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits() {
        let x = softmax_cross_entropy(&Tensor::filled(&[2, 10], 3.0), &[0, 7]).unwrap();
        assert!((x.loss - 10f64.ln()).abs() < 1e-12);
        assert!(x.probabilities.values().iter().all(|&p| (p - 0.1).abs() < 1e-15));
    }

    #[test]
    fn large_margin_is_stable() {
        let mut logits = Tensor::zeros(&[1, 10]);
        logits.values_mut()[4] = 1000.0;
        let x = softmax_cross_entropy(&logits, &[4]).unwrap();
        assert!(x.loss.abs() < 1e-12);
        assert!(x.probabilities.values().iter().all(|p| p.is_finite()));
        let wrong = softmax_cross_entropy(&logits, &[3]).unwrap();
        assert!((wrong.loss - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_finite_and_bad_labels() {
        let mut logits = Tensor::zeros(&[1, 10]);
        assert_eq!(
            softmax_cross_entropy(&logits, &[10]).unwrap_err(),
            NnError::Label { label: 10, classes: 10 }
        );
        logits.values_mut()[0] = f64::NAN;
        assert_eq!(
            softmax_cross_entropy(&logits, &[0]).unwrap_err(),
            NnError::NonFinite("softmax_cross_entropy")
        );
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = softmax(&[1.0, 2.0, 3.0]);
        let b = softmax(&[101.0, 102.0, 103.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
