//! 3×3 same-padded cross-correlation with stride 1 or 2.

use super::{NnError, Tensor};

pub const KERNEL: usize = 3;

/// Output side for padding 1 and a 3×3 kernel.
pub fn conv_out_size(n: usize, stride: usize) -> usize {
    n.div_ceil(stride)
}

struct Dims {
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
    oh: usize,
    ow: usize,
    stride: usize,
}

/// Columns `ox` for which `ox * stride + kx - 1` lies inside `0..w`.
#[inline]
fn ox_range(kx: usize, w: usize, ow: usize, stride: usize) -> (usize, usize) {
    let lo = if kx == 0 { 1 } else { 0 };
    let hi = (w + 1 - kx).div_ceil(stride).min(ow);
    (lo, hi)
}

#[inline]
fn iy_of(oy: usize, ky: usize, stride: usize, h: usize) -> Option<usize> {
    (oy * stride + ky).checked_sub(1).filter(|&iy| iy < h)
}

fn forward_one(d: &Dims, input: &[f64], kernels: &[f64], bias: &[f64], out: &mut [f64]) {
    let (plane_in, plane_out) = (d.h * d.w, d.oh * d.ow);
    for o in 0..d.c_out {
        let out_o = &mut out[o * plane_out..(o + 1) * plane_out];
        out_o.fill(bias[o]);
        for c in 0..d.c_in {
            let in_c = &input[c * plane_in..(c + 1) * plane_in];
            let k = &kernels[(o * d.c_in + c) * 9..(o * d.c_in + c + 1) * 9];
            for ky in 0..KERNEL {
                for oy in 0..d.oh {
                    let Some(iy) = iy_of(oy, ky, d.stride, d.h) else {
                        continue;
                    };
                    let row_in = &in_c[iy * d.w..(iy + 1) * d.w];
                    let row_out = &mut out_o[oy * d.ow..(oy + 1) * d.ow];
                    for kx in 0..KERNEL {
                        let wv = k[ky * 3 + kx];
                        let (lo, hi) = ox_range(kx, d.w, d.ow, d.stride);
                        if d.stride == 1 {
                            let src = &row_in[lo + kx - 1..hi + kx - 1];
                            for (dst, s) in row_out[lo..hi].iter_mut().zip(src) {
                                *dst += wv * s;
                            }
                        } else {
                            for ox in lo..hi {
                                row_out[ox] += wv * row_in[ox * d.stride + kx - 1];
                            }
                        }
                    }
                }
            }
        }
    }
}

fn backward_one(
    d: &Dims,
    grad_out: &[f64],
    input: &[f64],
    kernels: &[f64],
    grad_in: Option<&mut [f64]>,
    grad_k: &mut [f64],
    grad_b: &mut [f64],
) {
    let (plane_in, plane_out) = (d.h * d.w, d.oh * d.ow);
    for o in 0..d.c_out {
        let g_o = &grad_out[o * plane_out..(o + 1) * plane_out];
        grad_b[o] += g_o.iter().sum::<f64>();
        for c in 0..d.c_in {
            let in_c = &input[c * plane_in..(c + 1) * plane_in];
            let base = (o * d.c_in + c) * 9;
            for ky in 0..KERNEL {
                for kx in 0..KERNEL {
                    let (lo, hi) = ox_range(kx, d.w, d.ow, d.stride);
                    let mut acc = 0.0;
                    for oy in 0..d.oh {
                        let Some(iy) = iy_of(oy, ky, d.stride, d.h) else {
                            continue;
                        };
                        let row_in = &in_c[iy * d.w..(iy + 1) * d.w];
                        let row_g = &g_o[oy * d.ow..(oy + 1) * d.ow];
                        for ox in lo..hi {
                            acc += row_g[ox] * row_in[ox * d.stride + kx - 1];
                        }
                    }
                    grad_k[base + ky * 3 + kx] += acc;
                }
            }
        }
    }
    let Some(grad_in) = grad_in else { return };
    for o in 0..d.c_out {
        let g_o = &grad_out[o * plane_out..(o + 1) * plane_out];
        for c in 0..d.c_in {
            let gi_c = &mut grad_in[c * plane_in..(c + 1) * plane_in];
            let k = &kernels[(o * d.c_in + c) * 9..(o * d.c_in + c + 1) * 9];
            for ky in 0..KERNEL {
                for oy in 0..d.oh {
                    let Some(iy) = iy_of(oy, ky, d.stride, d.h) else {
                        continue;
                    };
                    let row_gi = &mut gi_c[iy * d.w..(iy + 1) * d.w];
                    let row_g = &g_o[oy * d.ow..(oy + 1) * d.ow];
                    for kx in 0..KERNEL {
                        let wv = k[ky * 3 + kx];
                        let (lo, hi) = ox_range(kx, d.w, d.ow, d.stride);
                        for ox in lo..hi {
                            row_gi[ox * d.stride + kx - 1] += wv * row_g[ox];
                        }
                    }
                }
            }
        }
    }
}

/// Splits an input shape into (batch, C, H, W); `[C, H, W]` is a batch of one.
fn batch_dims(shape: &[usize]) -> Option<(usize, usize, usize, usize, bool)> {
    match *shape {
        [c, h, w] => Some((1, c, h, w, false)),
        [b, c, h, w] => Some((b, c, h, w, true)),
        _ => None,
    }
}

fn check(
    op: &'static str,
    input: &Tensor,
    kernels: &Tensor,
    bias: &Tensor,
    stride: usize,
) -> Result<(usize, Dims, bool), NnError> {
    let shape_err = |expected: Vec<usize>, got: &[usize]| NnError::Shape {
        op,
        expected,
        got: got.to_vec(),
    };
    let &[c_out, kc, 3, 3] = kernels.shape() else {
        return Err(shape_err(vec![0, 0, 3, 3], kernels.shape()));
    };
    if bias.shape() != [c_out] {
        return Err(shape_err(vec![c_out], bias.shape()));
    }
    let Some((b, c_in, h, w, batched)) = batch_dims(input.shape()) else {
        return Err(shape_err(vec![kc, 0, 0], input.shape()));
    };
    if c_in != kc {
        return Err(shape_err(kernels.shape().to_vec(), input.shape()));
    }
    assert!(stride == 1 || stride == 2, "stride must be 1 or 2");
    let dims = Dims {
        c_in,
        h,
        w,
        c_out,
        oh: conv_out_size(h, stride),
        ow: conv_out_size(w, stride),
        stride,
    };
    Ok((b, dims, batched))
}

/// Cross-correlation plus bias over `[C, H, W]` or `[B, C, H, W]` input.
pub fn conv2d_forward(input: &Tensor, kernels: &Tensor, bias: &Tensor, stride: usize) -> Result<Tensor, NnError> {
    let (b, d, batched) = check("conv2d_forward", input, kernels, bias, stride)?;
    let (in_len, out_len) = (d.c_in * d.h * d.w, d.c_out * d.oh * d.ow);
    let mut out = vec![0.0; b * out_len];
    for (x, y) in input.values().chunks(in_len).zip(out.chunks_mut(out_len)) {
        forward_one(&d, x, kernels.values(), bias.values(), y);
    }
    let shape = if batched {
        vec![b, d.c_out, d.oh, d.ow]
    } else {
        vec![d.c_out, d.oh, d.ow]
    };
    Ok(Tensor::from_vec(&shape, out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub input: Option<Tensor>,
    pub kernels: Tensor,
    pub bias: Tensor,
}

/// Gradients of [`conv2d_forward`] given the upstream gradient. Kernel and
/// bias gradients are summed over the batch.
pub fn conv2d_backward(
    grad_out: &Tensor,
    input: &Tensor,
    kernels: &Tensor,
    stride: usize,
    need_input: bool,
) -> Result<ConvGrads, NnError> {
    let c_out = kernels.shape().first().copied().unwrap_or(0);
    let bias = Tensor::zeros(&[c_out]);
    let (b, d, batched) = check("conv2d_backward", input, kernels, &bias, stride)?;
    let expected = if batched {
        vec![b, d.c_out, d.oh, d.ow]
    } else {
        vec![d.c_out, d.oh, d.ow]
    };
    if grad_out.shape() != expected.as_slice() {
        return Err(NnError::Shape {
            op: "conv2d_backward",
            expected,
            got: grad_out.shape().to_vec(),
        });
    }
    let (in_len, out_len) = (d.c_in * d.h * d.w, d.c_out * d.oh * d.ow);
    let mut grad_k = Tensor::zeros(kernels.shape());
    let mut grad_b = Tensor::zeros(&[d.c_out]);
    let mut grad_in = need_input.then(|| Tensor::zeros(input.shape()));
    for i in 0..b {
        let gi = grad_in
            .as_mut()
            .map(|t| &mut t.values_mut()[i * in_len..(i + 1) * in_len]);
        backward_one(
            &d,
            &grad_out.values()[i * out_len..(i + 1) * out_len],
            &input.values()[i * in_len..(i + 1) * in_len],
            kernels.values(),
            gi,
            grad_k.values_mut(),
            grad_b.values_mut(),
        );
    }
    Ok(ConvGrads {
        input: grad_in,
        kernels: grad_k,
        bias: grad_b,
    })
}
