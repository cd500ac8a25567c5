//! The network under study: one fully connected tanh hidden layer with as
//! many units as input pixels, no biases, and a softmax readout. Forward
//! and backward passes are written out by hand.

use crate::error::{CoreError, Result};
use crate::numerics::matrix::{gaussian_matrix, matmul, matmul_nt, matmul_tn, Matrix};
use crate::numerics::rng::RngStream;
use crate::numerics::stats::{weight_stats, WeightStats};
use crate::phase::tanh_open;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Trainable state: hidden n x n and readout classes x n, both bias-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub w_hidden: Matrix,
    pub w_out: Matrix,
}

impl NetworkParams {
    pub fn n_units(&self) -> usize {
        self.w_hidden.rows()
    }

    pub fn n_classes(&self) -> usize {
        self.w_out.rows()
    }

    /// Phase coordinates of the hidden layer.
    pub fn hidden_stats(&self) -> Result<WeightStats> {
        weight_stats(&self.w_hidden, self.n_units())
    }
}

/// Gradient estimate with the same shapes as the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub g_hidden: Matrix,
    pub g_out: Matrix,
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub x: Matrix,
    /// Hidden activations, every entry in (-1, 1).
    pub h: Matrix,
    /// Row-stochastic class probabilities.
    pub p: Matrix,
}

/// Initialization scales: hidden entries ~ N(J0/n, J^2/n), readout
/// entries ~ N(0, out_std^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub j0: f64,
    pub j: f64,
    pub out_std: f64,
}

impl InitSpec {
    /// The paper's starting point deep in the ordered phase, with readout
    /// entries at 1/sqrt(n) to keep initial logits O(1).
    pub fn ordered_default(n: usize) -> Self {
        InitSpec {
            j0: 0.0,
            j: 0.5,
            out_std: 1.0 / (n as f64).sqrt(),
        }
    }
}

/// Draws fresh parameters; hidden first, then readout, from one stream.
pub fn init_network(
    n: usize,
    classes: usize,
    init: InitSpec,
    rng: &mut RngStream,
) -> Result<NetworkParams> {
    if init.j < 0.0 || init.out_std < 0.0 {
        return Err(CoreError::invalid(format!(
            "negative scale in init: j={}, out_std={}",
            init.j, init.out_std
        )));
    }
    let nf = n as f64;
    let w_hidden = gaussian_matrix(n, n, init.j0 / nf, init.j / nf.sqrt(), rng)?;
    let w_out = gaussian_matrix(classes, n, 0.0, init.out_std, rng)?;
    Ok(NetworkParams { w_hidden, w_out })
}

/// Row softmax with max subtraction, in place.
pub(crate) fn softmax_rows(logits: &mut Matrix) {
    let cols = logits.cols();
    for row in logits.as_mut_slice().chunks_exact_mut(cols) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
}

/// Forward pass: `h = tanh(x W_h^T)`, `p = softmax(h W_o^T)`.
pub fn forward(params: &NetworkParams, x: &Matrix) -> Result<ForwardCache> {
    if x.cols() != params.n_units() {
        return Err(CoreError::shape(format!(
            "input dim {} != network units {}",
            x.cols(),
            params.n_units()
        )));
    }
    let mut h = matmul_nt(x, &params.w_hidden)?;
    for v in h.as_mut_slice() {
        *v = tanh_open(*v);
    }
    let mut p = matmul_nt(&h, &params.w_out)?;
    softmax_rows(&mut p);
    Ok(ForwardCache { x: x.clone(), h, p })
}

fn check_labels(labels: &[u8], batch: usize, classes: usize) -> Result<()> {
    if labels.len() != batch {
        return Err(CoreError::shape(format!(
            "{} labels for batch of {batch}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
        return Err(CoreError::invalid(format!(
            "label {bad} outside [0, {classes})"
        )));
    }
    Ok(())
}

/// -ln(p), floored against underflow; NaN propagates so blown-up runs
/// are detected rather than masked.
#[inline]
fn neg_log_prob(p: f64) -> f64 {
    if p.is_nan() {
        f64::NAN
    } else {
        -p.max(1e-300).ln()
    }
}

/// Mean cross-entropy over the batch.
fn cross_entropy(p: &Matrix, labels: &[u8]) -> f64 {
    let mut acc = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        acc += neg_log_prob(p.get(i, l as usize));
    }
    acc / labels.len() as f64
}

/// Loss and backprop gradients:
/// `d_logits = (p - onehot)/B`, `g_out = d_logits^T h`,
/// `d_h = d_logits W_o * (1 - h^2)`, `g_hidden = d_h^T x`.
pub fn loss_and_grads(
    params: &NetworkParams,
    x: &Matrix,
    labels: &[u8],
) -> Result<(f64, Gradients, ForwardCache)> {
    let cache = forward(params, x)?;
    let batch = x.rows();
    check_labels(labels, batch, params.n_classes())?;
    let loss = cross_entropy(&cache.p, labels);

    let mut d_logits = cache.p.clone();
    let inv_b = 1.0 / batch as f64;
    for (i, &l) in labels.iter().enumerate() {
        let v = d_logits.get(i, l as usize) - 1.0;
        d_logits.set(i, l as usize, v);
    }
    d_logits.scale(inv_b);

    let g_out = matmul_tn(&d_logits, &cache.h)?;
    let mut d_h = matmul(&d_logits, &params.w_out)?;
    for (dv, hv) in d_h.as_mut_slice().iter_mut().zip(cache.h.as_slice()) {
        *dv *= 1.0 - hv * hv;
    }
    let g_hidden = matmul_tn(&d_h, &cache.x)?;
    Ok((loss, Gradients { g_hidden, g_out }, cache))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub loss: f64,
    pub accuracy: f64,
}

const EVAL_BATCH: usize = 512;

/// Mean cross-entropy and top-1 accuracy over the whole dataset,
/// internally sharded; ties in argmax go to the lowest class index.
pub fn evaluate(params: &NetworkParams, dataset: &crate::data::Dataset) -> Result<EvalMetrics> {
    evaluate_with_batch(params, dataset, EVAL_BATCH)
}

/// Same as `evaluate` with an explicit shard size; the result is
/// shard-size invariant up to summation rounding.
pub fn evaluate_with_batch(
    params: &NetworkParams,
    dataset: &crate::data::Dataset,
    batch: usize,
) -> Result<EvalMetrics> {
    let s = dataset.n_samples();
    if s == 0 {
        return Err(CoreError::InsufficientData("empty dataset".into()));
    }
    let batch = batch.max(1);
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    let mut start = 0;
    while start < s {
        let end = (start + batch).min(s);
        let idx: Vec<usize> = (start..end).collect();
        let x = dataset.images().select_rows(&idx);
        let labels = &dataset.labels()[start..end];
        let cache = forward(params, &x)?;
        for (i, &l) in labels.iter().enumerate() {
            loss_sum += neg_log_prob(cache.p.get(i, l as usize));
            let row = cache.p.row(i);
            let mut arg = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[arg] {
                    arg = c;
                }
            }
            if arg == l as usize {
                correct += 1;
            }
        }
        start = end;
    }
    Ok(EvalMetrics {
        loss: loss_sum / s as f64,
        accuracy: correct as f64 / s as f64,
    })
}

/// Checkpoint container: shape header, seed lineage, and both matrices.
/// JSON round-trips f64 exactly (shortest-representation encoding).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub classes: usize,
    pub seed: u64,
    pub epoch: usize,
    pub params: NetworkParams,
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(f, ck)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let ck: Checkpoint = serde_json::from_reader(f)?;
    if ck.params.w_hidden.rows() != ck.n
        || ck.params.w_hidden.cols() != ck.n
        || ck.params.w_out.rows() != ck.classes
        || ck.params.w_out.cols() != ck.n
    {
        return Err(CoreError::parse("checkpoint", "shape header mismatch"));
    }
    Ok(ck)
}
