//! Small deterministic CNN engine with hand-written forward and backward
//! passes. Activations are `f64` tensors laid out `[B, C, H, W]`.

mod adam;
mod batchnorm;
mod block;
mod checkpoint;
mod conv;
mod dense;
mod dropout;
mod init;
mod tensor;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use batchnorm::{batchnorm_backward, batchnorm_forward, BatchNorm, BnCache, BN_EPS, BN_MOMENTUM};
pub use block::{BlockCache, BlockGrads, ConvBlock};
pub use checkpoint::{checkpoint_len, load_tensors, save_tensors, NNW_MAGIC};
pub use conv::{conv2d_backward, conv2d_forward, conv_out_size, ConvGrads};
pub use dense::{dense_softmax_xent, softmax, softmax_cross_entropy, Dense, DenseXent, Xent};
pub use dropout::{dropout, dropout_backward};
pub use init::{glorot_uniform, he_uniform_init};
pub use tensor::Tensor;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("{op}: shape mismatch, expected {expected:?}, got {got:?}")]
    Shape {
        op: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("batch norm needs at least 2 examples in train mode, got {0}")]
    BatchTooSmall(usize),
    #[error("{0}: non-finite value")]
    NonFinite(&'static str),
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}
