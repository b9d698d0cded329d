//! The seven-block goal-recognition network: base training, few-shot
//! adaptation with frozen leading blocks, prediction and accuracy.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{Example, LabeledPath};
use crate::encoder::{encode_with, Channel, GoalPrecedence, TrailBitmap};
use crate::gridworld::Scenario;
use crate::nn::{
    adam_step, dense_softmax_xent, glorot_uniform, load_tensors, save_tensors, softmax, AdamConfig, AdamState,
    ConvBlock, Dense, Mode, NnError, Tensor,
};
use crate::planner::truncate;
use crate::seed;
use crate::{Error, GOAL_COUNT};

pub const BLOCK_COUNT: usize = 7;
pub const FILTERS: usize = 16;
/// Spatial side below which blocks stop downsampling.
pub const MIN_SIDE: usize = 4;
const EVAL_BATCH: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum RecognizerError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("expected {expected} shot examples, got {got}")]
    ShotCount { expected: usize, got: usize },
    #[error("cannot freeze {0} blocks, network has {BLOCK_COUNT}")]
    FrozenBlocks(usize),
    #[error("example grid size {got} does not match network grid size {expected}")]
    GridSize { expected: usize, got: usize },
    #[error("grid size {0} must be a power of two >= 8")]
    UnsupportedGrid(usize),
    #[error("layer {0} out of range 1..={BLOCK_COUNT}")]
    Layer(usize),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// Five epochs, Adam at 0.01, batches of 32.
    pub fn base(seed: u64) -> Self {
        TrainConfig {
            epochs: 5,
            lr: 0.01,
            batch_size: 32,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferConfig {
    pub frozen_blocks: usize,
    pub shots: usize,
    pub transfer_lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl TransferConfig {
    pub fn new(frozen_blocks: usize, shots: usize, transfer_lr: f64, seed: u64) -> Self {
        TransferConfig {
            frozen_blocks,
            shots,
            transfer_lr,
            epochs: 3,
            batch_size: 32,
            seed,
        }
    }
}

/// Convolutional blocks followed by a dense softmax head over ten goals.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    grid_size: usize,
    plain: bool,
    blocks: Vec<ConvBlock>,
    head: Dense,
    block_adam: Vec<Vec<AdamState>>,
    head_adam: Vec<AdamState>,
}

/// Stride 2 while the side exceeds [`MIN_SIDE`], then stride 1.
pub fn block_strides(grid_size: usize) -> Vec<usize> {
    let mut side = grid_size;
    (0..BLOCK_COUNT)
        .map(|_| {
            if side > MIN_SIDE {
                side = side.div_ceil(2);
                2
            } else {
                1
            }
        })
        .collect()
}

/// Spatial side after each block.
pub fn block_sides(grid_size: usize) -> Vec<usize> {
    let mut side = grid_size;
    block_strides(grid_size)
        .into_iter()
        .map(|s| {
            side = side.div_ceil(s);
            side
        })
        .collect()
}

impl Network {
    /// Block network (conv, batch-norm, ReLU, dropout 0.1) with He-uniform
    /// kernels.
    pub fn new(grid_size: usize, seed_value: u64) -> Result<Self, RecognizerError> {
        Network::build(grid_size, seed_value, false)
    }

    /// Conv + ReLU only, no batch-norm or dropout.
    pub fn plain(grid_size: usize, seed_value: u64) -> Result<Self, RecognizerError> {
        Network::build(grid_size, seed_value, true)
    }

    fn build(grid_size: usize, seed_value: u64, plain: bool) -> Result<Self, RecognizerError> {
        if !grid_size.is_power_of_two() || grid_size < 8 {
            return Err(RecognizerError::UnsupportedGrid(grid_size));
        }
        let mut rng = seed::rng(seed_value, &[seed::tag::INIT]);
        let blocks: Vec<ConvBlock> = block_strides(grid_size)
            .into_iter()
            .enumerate()
            .map(|(i, stride)| {
                let c_in = if i == 0 { Channel::COUNT } else { FILTERS };
                ConvBlock::new(c_in, FILTERS, stride, plain, &mut rng)
            })
            .collect();
        let side = *block_sides(grid_size).last().unwrap();
        let features = FILTERS * side * side;
        let head = Dense {
            weights: glorot_uniform(&[GOAL_COUNT, features], features, GOAL_COUNT, &mut rng),
            bias: Tensor::zeros(&[GOAL_COUNT]),
        };
        let mut net = Network {
            grid_size,
            plain,
            blocks,
            head,
            block_adam: Vec::new(),
            head_adam: Vec::new(),
        };
        net.reset_optimizer();
        Ok(net)
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn is_plain(&self) -> bool {
        self.plain
    }

    pub fn blocks(&self) -> &[ConvBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [ConvBlock] {
        &mut self.blocks
    }

    pub fn head(&self) -> &Dense {
        &self.head
    }

    pub fn head_mut(&mut self) -> &mut Dense {
        &mut self.head
    }

    pub fn feature_len(&self) -> usize {
        self.head.inputs()
    }

    /// Freezes the first `k` blocks and unfreezes the rest.
    pub fn freeze_first(&mut self, k: usize) -> Result<(), RecognizerError> {
        if k > BLOCK_COUNT {
            return Err(RecognizerError::FrozenBlocks(k));
        }
        for (i, b) in self.blocks.iter_mut().enumerate() {
            b.frozen = i < k;
        }
        Ok(())
    }

    pub fn frozen_prefix(&self) -> usize {
        self.blocks.iter().take_while(|b| b.frozen).count()
    }

    /// Fresh Adam moments for every parameter.
    pub fn reset_optimizer(&mut self) {
        self.block_adam = self
            .blocks
            .iter()
            .map(|b| b.params().iter().map(|p| AdamState::new(p.shape())).collect())
            .collect();
        self.head_adam = vec![
            AdamState::new(self.head.weights.shape()),
            AdamState::new(self.head.bias.shape()),
        ];
    }

    fn check_grid(&self, bitmap: &TrailBitmap) -> Result<(), RecognizerError> {
        if bitmap.size() != self.grid_size {
            return Err(RecognizerError::GridSize {
                expected: self.grid_size,
                got: bitmap.size(),
            });
        }
        Ok(())
    }

    /// Stacks bitmaps into a `[B, 5, N, N]` input tensor.
    pub fn input_batch(&self, bitmaps: &[&TrailBitmap]) -> Result<Tensor, RecognizerError> {
        let plane = Channel::COUNT * self.grid_size * self.grid_size;
        let mut values = vec![0.0; bitmaps.len() * plane];
        for (b, chunk) in bitmaps.iter().zip(values.chunks_mut(plane)) {
            self.check_grid(b)?;
            b.write_planes(chunk);
        }
        Ok(Tensor::from_vec(
            &[bitmaps.len(), Channel::COUNT, self.grid_size, self.grid_size],
            values,
        ))
    }

    /// Eval-mode output of the first `upto` blocks.
    pub fn forward_blocks(&self, input: &Tensor, upto: usize) -> Result<Tensor, RecognizerError> {
        let mut x = input.clone();
        for b in &self.blocks[..upto] {
            x = b.infer(&x)?;
        }
        Ok(x)
    }

    /// Eval-mode logits `[B, 10]`.
    pub fn logits(&self, input: &Tensor) -> Result<Tensor, RecognizerError> {
        let x = self.forward_blocks(input, BLOCK_COUNT)?;
        let b = x.shape()[0];
        Ok(self.head.forward(&x.reshape(&[b, self.feature_len()]))?)
    }

    /// Eval-mode softmax scores for one bitmap.
    pub fn probabilities(&self, bitmap: &TrailBitmap) -> Result<Vec<f64>, RecognizerError> {
        let logits = self.logits(&self.input_batch(&[bitmap])?)?;
        Ok(softmax(logits.values()))
    }

    /// Eval-mode output `[16, H, W]` of block `layer` (1-based).
    pub fn activations(&self, bitmap: &TrailBitmap, layer: usize) -> Result<Tensor, RecognizerError> {
        if !(1..=BLOCK_COUNT).contains(&layer) {
            return Err(RecognizerError::Layer(layer));
        }
        let x = self.forward_blocks(&self.input_batch(&[bitmap])?, layer)?;
        let shape = x.shape()[1..].to_vec();
        Ok(x.reshape(&shape))
    }

    /// One Adam step on a minibatch whose activations enter at block
    /// `from_block`. Returns the batch mean loss.
    fn train_batch<R: Rng>(
        &mut self,
        from_block: usize,
        input: Tensor,
        labels: &[usize],
        adam: &AdamConfig,
        rng: &mut R,
    ) -> Result<f64, RecognizerError> {
        let mut x = input;
        let mut caches = Vec::with_capacity(BLOCK_COUNT - from_block);
        for b in &mut self.blocks[from_block..] {
            let mode = if b.frozen { Mode::Eval } else { Mode::Train };
            let (y, cache) = b.forward(&x, mode, rng)?;
            caches.push(cache);
            x = y;
        }
        let out_shape = x.shape().to_vec();
        let batch = out_shape[0];
        let xent = dense_softmax_xent(&x.reshape(&[batch, self.feature_len()]), &self.head, labels)?;

        let mut grad = xent.grad_features.reshape(&out_shape);
        let mut block_grads = Vec::with_capacity(caches.len());
        for (offset, cache) in caches.iter().enumerate().rev() {
            let i = from_block + offset;
            let need_input = self.blocks[from_block..i].iter().any(|b| !b.frozen);
            let g = self.blocks[i].backward(&grad, cache, need_input)?;
            if let Some(gi) = g.input.clone() {
                grad = gi;
            }
            block_grads.push((i, g));
            if !need_input {
                break;
            }
        }
        for (i, g) in block_grads {
            let block = &mut self.blocks[i];
            let frozen = block.frozen;
            for ((p, gt), state) in block
                .params_mut()
                .into_iter()
                .zip(g.tensors())
                .zip(self.block_adam[i].iter_mut())
            {
                adam_step(p, gt, state, adam, frozen);
            }
        }
        adam_step(
            &mut self.head.weights,
            &xent.grad_weights,
            &mut self.head_adam[0],
            adam,
            false,
        );
        adam_step(
            &mut self.head.bias,
            &xent.grad_bias,
            &mut self.head_adam[1],
            adam,
            false,
        );
        Ok(xent.loss)
    }

    /// Epoch loop over shuffled minibatches; returns per-epoch mean loss.
    #[allow(clippy::too_many_arguments)]
    fn fit(
        &mut self,
        from_block: usize,
        labels: &[usize],
        input_at: &dyn Fn(&[usize]) -> Result<Tensor, RecognizerError>,
        epochs: usize,
        lr: f64,
        batch_size: usize,
        seed_value: u64,
    ) -> Result<Vec<f64>, RecognizerError> {
        let adam = AdamConfig::with_lr(lr);
        let mut curve = Vec::with_capacity(epochs);
        for epoch in 0..epochs {
            let mut order: Vec<usize> = (0..labels.len()).collect();
            order.shuffle(&mut seed::rng(seed_value, &[seed::tag::EPOCH, epoch as u64]));
            let mut batches: Vec<&[usize]> = order.chunks(batch_size.max(1)).collect();
            // Batch norm needs two examples; fold a trailing singleton back.
            if batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
                batches.pop();
                let n = batches.len();
                let start = (n - 1) * batch_size;
                batches[n - 1] = &order[start..];
            }
            let (mut total, mut seen) = (0.0, 0usize);
            for (bi, idx) in batches.into_iter().enumerate() {
                let x = input_at(idx)?;
                let y: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
                let mut rng = seed::rng(seed_value, &[seed::tag::DROPOUT, epoch as u64, bi as u64]);
                let loss = self.train_batch(from_block, x, &y, &adam, &mut rng)?;
                total += loss * idx.len() as f64;
                seen += idx.len();
            }
            curve.push(total / seen as f64);
        }
        Ok(curve)
    }

    pub fn to_tensors(&self) -> Vec<(String, Tensor)> {
        let arch = Tensor::from_vec(
            &[4],
            vec![
                self.grid_size as f64,
                if self.plain { 1.0 } else { 0.0 },
                Channel::COUNT as f64,
                FILTERS as f64,
            ],
        );
        let mut out = vec![("arch".to_string(), arch)];
        for (i, b) in self.blocks.iter().enumerate() {
            out.push((format!("block{i}.kernels"), b.kernels.clone()));
            out.push((format!("block{i}.bias"), b.bias.clone()));
            if let Some(bn) = &b.bn {
                out.push((format!("block{i}.bn_gamma"), bn.gamma.clone()));
                out.push((format!("block{i}.bn_beta"), bn.beta.clone()));
                out.push((format!("block{i}.bn_running_mean"), bn.running_mean.clone()));
                out.push((format!("block{i}.bn_running_var"), bn.running_var.clone()));
            }
        }
        out.push(("head.weights".to_string(), self.head.weights.clone()));
        out.push(("head.bias".to_string(), self.head.bias.clone()));
        out
    }

    /// `NNW1` checkpoint bytes of all parameters and batch-norm statistics.
    pub fn save(&self) -> Vec<u8> {
        save_tensors(&self.to_tensors())
    }

    pub fn load(bytes: &[u8]) -> Result<Self, RecognizerError> {
        let bad = |m: String| RecognizerError::Checkpoint(m);
        let tensors = load_tensors(bytes)?;
        let mut named: BTreeMap<String, Tensor> = tensors.into_iter().collect();
        let arch = named.remove("arch").ok_or_else(|| bad("missing arch".into()))?;
        let &[grid, plain, c_in, filters] = arch.values() else {
            return Err(bad("malformed arch".into()));
        };
        if c_in != Channel::COUNT as f64 || filters != FILTERS as f64 {
            return Err(bad(format!("unsupported arch {:?}", arch.values())));
        }
        let mut net = Network::build(grid as usize, 0, plain != 0.0)?;
        let expected: Vec<(String, Tensor)> = net.to_tensors().into_iter().skip(1).collect();
        let mut filled = Vec::with_capacity(expected.len());
        for (name, template) in expected {
            let t = named
                .remove(&name)
                .ok_or_else(|| bad(format!("missing tensor {name}")))?;
            if t.shape() != template.shape() {
                return Err(bad(format!(
                    "tensor {name} has shape {:?}, expected {:?}",
                    t.shape(),
                    template.shape()
                )));
            }
            filled.push((name, t));
        }
        if let Some(extra) = named.keys().next() {
            return Err(bad(format!("unexpected tensor {extra}")));
        }
        let mut it = filled.into_iter().map(|(_, t)| t);
        for b in &mut net.blocks {
            b.kernels = it.next().unwrap();
            b.bias = it.next().unwrap();
            if let Some(bn) = &mut b.bn {
                bn.gamma = it.next().unwrap();
                bn.beta = it.next().unwrap();
                bn.running_mean = it.next().unwrap();
                bn.running_var = it.next().unwrap();
            }
        }
        net.head.weights = it.next().unwrap();
        net.head.bias = it.next().unwrap();
        Ok(net)
    }
}

/// Trains every block and the head; returns per-epoch mean loss.
pub fn train_base(net: &mut Network, train: &[Example], cfg: &TrainConfig) -> Result<Vec<f64>, RecognizerError> {
    if train.is_empty() {
        return Err(RecognizerError::EmptyDataset);
    }
    for e in train {
        net.check_grid(&e.bitmap)?;
    }
    net.freeze_first(0)?;
    let labels: Vec<usize> = train.iter().map(|e| e.label as usize).collect();
    let snapshot = net.clone();
    let input_at = |idx: &[usize]| {
        let maps: Vec<&TrailBitmap> = idx.iter().map(|&i| &train[i].bitmap).collect();
        snapshot.input_batch(&maps)
    };
    net.fit(0, &labels, &input_at, cfg.epochs, cfg.lr, cfg.batch_size, cfg.seed)
}

/// Copies the base network, freezes its first `cfg.frozen_blocks` blocks
/// (parameters and batch-norm statistics, evaluated in eval mode) and trains
/// the remaining blocks and the head on the shots with fresh Adam state.
pub fn adapt(base: &Network, cfg: &TransferConfig, shots: &[Example]) -> Result<Network, RecognizerError> {
    let expected = 4 * GOAL_COUNT * cfg.shots;
    if shots.len() != expected {
        return Err(RecognizerError::ShotCount {
            expected,
            got: shots.len(),
        });
    }
    let mut net = base.clone();
    net.freeze_first(cfg.frozen_blocks)?;
    net.reset_optimizer();
    if shots.is_empty() {
        return Ok(net);
    }
    // Frozen blocks are deterministic in eval mode, so their output is
    // computed once per example.
    let k = cfg.frozen_blocks;
    let mut prefix: Vec<Tensor> = Vec::with_capacity(shots.len().div_ceil(EVAL_BATCH));
    for chunk in shots.chunks(EVAL_BATCH) {
        let maps: Vec<&TrailBitmap> = chunk.iter().map(|e| &e.bitmap).collect();
        prefix.push(net.forward_blocks(&net.input_batch(&maps)?, k)?);
    }
    let item_shape = prefix[0].shape()[1..].to_vec();
    let item_len: usize = item_shape.iter().product();
    let flat: Vec<f64> = prefix.into_iter().flat_map(Tensor::into_values).collect();
    let input_at = |idx: &[usize]| {
        let mut v = Vec::with_capacity(idx.len() * item_len);
        for &i in idx {
            v.extend_from_slice(&flat[i * item_len..(i + 1) * item_len]);
        }
        let mut shape = vec![idx.len()];
        shape.extend_from_slice(&item_shape);
        Ok(Tensor::from_vec(&shape, v))
    };
    let labels: Vec<usize> = shots.iter().map(|e| e.label as usize).collect();
    net.fit(
        k,
        &labels,
        &input_at,
        cfg.epochs,
        cfg.transfer_lr,
        cfg.batch_size,
        cfg.seed,
    )?;
    Ok(net)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub goal: usize,
    pub probabilities: Vec<f64>,
}

/// Argmax of the scores; exact ties are broken uniformly at random.
pub fn choose_goal<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let max = probabilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..probabilities.len()).filter(|&i| probabilities[i] == max).collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.gen_range(0..tied.len())]
    }
}

pub fn predict<R: Rng + ?Sized>(
    net: &Network,
    bitmap: &TrailBitmap,
    rng: &mut R,
) -> Result<Prediction, RecognizerError> {
    let probabilities = net.probabilities(bitmap)?;
    Ok(Prediction {
        goal: choose_goal(&probabilities, rng),
        probabilities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictionRecord {
    pub label: u8,
    pub predicted: u8,
    pub observability: u8,
}

impl PredictionRecord {
    pub fn correct(&self) -> bool {
        self.label == self.predicted
    }
}

/// Logged predictions of one evaluation pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Evaluation {
    pub records: Vec<PredictionRecord>,
}

impl Evaluation {
    pub fn accuracy(&self) -> f64 {
        ratio(self.records.iter())
    }

    pub fn accuracy_at(&self, observability: u8) -> Option<f64> {
        let mut it = self
            .records
            .iter()
            .filter(|r| r.observability == observability)
            .peekable();
        it.peek()?;
        Some(ratio(it))
    }

    pub fn by_observability(&self) -> BTreeMap<u8, f64> {
        let mut counts: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
        for r in &self.records {
            let c = counts.entry(r.observability).or_default();
            c.0 += r.correct() as usize;
            c.1 += 1;
        }
        counts
            .into_iter()
            .map(|(k, (hit, n))| (k, hit as f64 / n as f64))
            .collect()
    }
}

fn ratio<'a>(records: impl Iterator<Item = &'a PredictionRecord>) -> f64 {
    let (mut hit, mut n) = (0usize, 0usize);
    for r in records {
        hit += r.correct() as usize;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        hit as f64 / n as f64
    }
}

fn predict_batch(
    net: &Network,
    bitmaps: &[&TrailBitmap],
    seed_value: u64,
    first: usize,
) -> Result<Vec<u8>, RecognizerError> {
    let logits = net.logits(&net.input_batch(bitmaps)?)?;
    Ok(logits
        .values()
        .chunks(GOAL_COUNT)
        .enumerate()
        .map(|(j, row)| {
            let mut rng = seed::rng(seed_value, &[seed::tag::TIE, (first + j) as u64]);
            choose_goal(&softmax(row), &mut rng) as u8
        })
        .collect())
}

/// Predicts every example in eval mode and logs the outcome.
pub fn evaluate(net: &Network, test: &[Example], seed_value: u64) -> Result<Evaluation, RecognizerError> {
    let predicted = test
        .par_chunks(EVAL_BATCH)
        .enumerate()
        .map(|(c, chunk)| {
            let maps: Vec<&TrailBitmap> = chunk.iter().map(|e| &e.bitmap).collect();
            predict_batch(net, &maps, seed_value, c * EVAL_BATCH)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Evaluation {
        records: test
            .iter()
            .zip(predicted.into_iter().flatten())
            .map(|(e, p)| PredictionRecord {
                label: e.label,
                predicted: p,
                observability: e.observability,
            })
            .collect(),
    })
}

/// Accuracy of full paths re-truncated at each grid point (percent), for
/// online convergence curves.
pub fn evaluate_prefix_grid(
    net: &Network,
    scenario: &Scenario,
    paths: &[LabeledPath],
    grid: &[f64],
    precedence: GoalPrecedence,
    seed_value: u64,
) -> Result<Vec<(f64, f64)>, Error> {
    grid.iter()
        .enumerate()
        .map(|(gi, &fraction)| {
            let examples = paths
                .iter()
                .map(|p| {
                    let obs = truncate(&p.path, fraction)?;
                    Ok(Example {
                        bitmap: encode_with(scenario, &obs, precedence)?,
                        label: p.label,
                        observability: fraction.round() as u8,
                        path_id: p.path_id,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let eval = evaluate(net, &examples, seed::derive(seed_value, &[gi as u64]))?;
            Ok((fraction, eval.accuracy()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stride_schedule() {
        assert_eq!(block_strides(512), vec![2; 7]);
        assert_eq!(block_sides(512), vec![256, 128, 64, 32, 16, 8, 4]);
        assert_eq!(block_strides(64), vec![2, 2, 2, 2, 1, 1, 1]);
        assert_eq!(block_strides(8), vec![2, 1, 1, 1, 1, 1, 1]);
        for n in [8, 16, 32, 64, 128, 256, 512] {
            assert_eq!(*block_sides(n).last().unwrap(), 4, "N = {n}");
        }
    }

    #[test]
    fn architecture_shape() {
        let net = Network::new(64, 1).unwrap();
        assert_eq!(net.blocks().len(), 7);
        assert_eq!(net.blocks()[0].in_channels(), 5);
        assert!(net.blocks()[1..].iter().all(|b| b.in_channels() == 16));
        assert!(net.blocks().iter().all(|b| b.filters() == 16 && b.dropout_p == 0.1));
        assert_eq!(net.feature_len(), 256);
        assert_eq!(net.head().outputs(), 10);
        assert_eq!(Network::new(48, 1).unwrap_err(), RecognizerError::UnsupportedGrid(48));
    }

    #[test]
    fn two_way_tie_is_fair() {
        let probs = [0.1, 0.4, 0.1, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let picks: Vec<usize> = (0..10_000).map(|_| choose_goal(&probs, &mut rng)).collect();
        let ones = picks.iter().filter(|&&g| g == 1).count();
        assert!(picks.iter().all(|&g| g == 1 || g == 3));
        assert!((4700..=5300).contains(&ones), "goal 1 chosen {ones} times");
    }

    #[test]
    fn freeze_bounds() {
        let mut net = Network::new(16, 1).unwrap();
        net.freeze_first(5).unwrap();
        assert_eq!(net.frozen_prefix(), 5);
        assert_eq!(net.freeze_first(8), Err(RecognizerError::FrozenBlocks(8)));
    }

    #[test]
    fn checkpoint_round_trip() {
        let net = Network::new(16, 3).unwrap();
        let bytes = net.save();
        let back = Network::load(&bytes).unwrap();
        assert_eq!(back.save(), bytes);
        let plain = Network::plain(16, 3).unwrap();
        assert!(Network::load(&plain.save()).unwrap().is_plain());
    }
}
