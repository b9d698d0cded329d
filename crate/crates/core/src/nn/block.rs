//! Conv → batch-norm → ReLU → dropout block.

use rand::Rng;

use super::{
    batchnorm_backward, batchnorm_forward, conv2d_backward, conv2d_forward, dropout, dropout_backward, he_uniform_init,
    BatchNorm, BnCache, Mode, NnError, Tensor,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvBlock {
    /// `[out, in, 3, 3]`
    pub kernels: Tensor,
    pub bias: Tensor,
    /// Absent in the plain (conv + ReLU) variant.
    pub bn: Option<BatchNorm>,
    pub stride: usize,
    pub dropout_p: f64,
    pub frozen: bool,
}

#[derive(Debug, Clone)]
pub struct BlockCache {
    input: Tensor,
    bn: Option<BnCache>,
    active: Vec<bool>,
    mask: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BlockGrads {
    pub input: Option<Tensor>,
    pub kernels: Tensor,
    pub bias: Tensor,
    pub gamma: Option<Tensor>,
    pub beta: Option<Tensor>,
}

impl ConvBlock {
    pub fn new<R: Rng + ?Sized>(in_channels: usize, filters: usize, stride: usize, plain: bool, rng: &mut R) -> Self {
        ConvBlock {
            kernels: he_uniform_init(&[filters, in_channels, 3, 3], in_channels * 9, rng),
            bias: Tensor::zeros(&[filters]),
            bn: (!plain).then(|| BatchNorm::new(filters)),
            stride,
            dropout_p: if plain { 0.0 } else { 0.1 },
            frozen: false,
        }
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.shape()[1]
    }

    pub fn filters(&self) -> usize {
        self.kernels.shape()[0]
    }

    /// Forward pass keeping what the backward pass needs. Eval mode uses
    /// running statistics and skips dropout.
    pub fn forward<R: Rng + ?Sized>(
        &mut self,
        x: &Tensor,
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Tensor, BlockCache), NnError> {
        let conv = conv2d_forward(x, &self.kernels, &self.bias, self.stride)?;
        let (mut y, bn_cache) = match self.bn.as_mut() {
            Some(bn) => {
                let (y, c) = batchnorm_forward(&conv, bn, mode)?;
                (y, Some(c))
            }
            None => (conv, None),
        };
        let active: Vec<bool> = y.values().iter().map(|&v| v > 0.0).collect();
        y.values_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        let (y, mask) = dropout(&y, self.dropout_p, mode, rng);
        Ok((
            y,
            BlockCache {
                input: x.clone(),
                bn: bn_cache,
                active,
                mask,
            },
        ))
    }

    /// Eval-mode forward without a cache.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor, NnError> {
        let conv = conv2d_forward(x, &self.kernels, &self.bias, self.stride)?;
        let mut y = match &self.bn {
            Some(bn) => batchnorm_forward(&conv, &mut bn.clone(), Mode::Eval)?.0,
            None => conv,
        };
        y.values_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        Ok(y)
    }

    pub fn backward(&self, grad_out: &Tensor, cache: &BlockCache, need_input: bool) -> Result<BlockGrads, NnError> {
        let mut g = grad_out.clone();
        dropout_backward(&mut g, cache.mask.as_deref());
        g.values_mut().iter_mut().zip(&cache.active).for_each(|(v, &a)| {
            if !a {
                *v = 0.0
            }
        });
        let (g, gamma, beta) = match (&self.bn, &cache.bn) {
            (Some(bn), Some(c)) => {
                let (gx, gg, gb) = batchnorm_backward(&g, c, bn)?;
                (gx, Some(gg), Some(gb))
            }
            _ => (g, None, None),
        };
        let conv = conv2d_backward(&g, &cache.input, &self.kernels, self.stride, need_input)?;
        Ok(BlockGrads {
            input: conv.input,
            kernels: conv.kernels,
            bias: conv.bias,
            gamma,
            beta,
        })
    }

    /// Trainable tensors in a fixed order: kernels, bias, then gamma, beta.
    pub fn params(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.kernels, &self.bias];
        if let Some(bn) = &self.bn {
            out.extend([&bn.gamma, &bn.beta]);
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.kernels, &mut self.bias];
        if let Some(bn) = &mut self.bn {
            out.extend([&mut bn.gamma, &mut bn.beta]);
        }
        out
    }
}

impl BlockGrads {
    /// Same order as [`ConvBlock::params`].
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.kernels, &self.bias];
        if let (Some(g), Some(b)) = (&self.gamma, &self.beta) {
            out.extend([g, b]);
        }
        out
    }
}
