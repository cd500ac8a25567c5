//! Dataset ingestion: IDX parsing, normalization, mini-batch planning,
//! stratified subsets, a synthetic stand-in generator, a binary cache,
//! and checksum verification.

pub mod cache;
pub mod checksums;
pub mod idx;
pub mod synthetic;

pub use idx::{load_idx, load_idx_dir, DataFiles};
pub use synthetic::{synthetic_dataset, write_synthetic_idx, SyntheticSpec};

use crate::error::{CoreError, Result};
use crate::numerics::matrix::Matrix;
use crate::numerics::rng::RngStream;
use serde::{Deserialize, Serialize};

pub const NUM_CLASSES: usize = 10;
pub const IMAGE_DIM: usize = 784;

/// Flattened images with pixel values in [0, 1] and class labels in
/// [0, 9]. Immutable after load.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Matrix,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(images: Matrix, labels: Vec<u8>) -> Result<Self> {
        if images.rows() != labels.len() {
            return Err(CoreError::DataIntegrity(format!(
                "{} images vs {} labels",
                images.rows(),
                labels.len()
            )));
        }
        if let Some(bad) = images
            .as_slice()
            .iter()
            .find(|p| !(0.0..=1.0).contains(*p))
        {
            return Err(CoreError::DataIntegrity(format!(
                "pixel {bad} outside [0, 1]"
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(CoreError::DataIntegrity(format!(
                "label {bad} outside [0, {})",
                NUM_CLASSES
            )));
        }
        Ok(Dataset { images, labels })
    }

    pub fn n_samples(&self) -> usize {
        self.images.rows()
    }

    pub fn dim(&self) -> usize {
        self.images.cols()
    }

    pub fn images(&self) -> &Matrix {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn image(&self, i: usize) -> &[f64] {
        self.images.row(i)
    }

    /// Samples selected by index, in the given order.
    pub fn take(&self, indices: &[usize]) -> Dataset {
        Dataset {
            images: self.images.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// One epoch's shuffled batching: a fresh permutation, trailing remainder
/// dropped so every epoch runs exactly floor(S/B) steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub batch_size: usize,
    pub order: Vec<usize>,
    pub n_batches: usize,
}

#[derive(Debug, Clone)]
pub struct MiniBatch {
    pub images: Matrix,
    pub labels: Vec<u8>,
}

/// Draws a fresh uniform permutation from `rng` and returns the plan plus
/// an iterator of mini-batches.
pub fn batches<'d>(
    dataset: &'d Dataset,
    batch_size: usize,
    rng: &mut RngStream,
) -> Result<(BatchPlan, BatchIter<'d>)> {
    let s = dataset.n_samples();
    if batch_size == 0 || batch_size > s {
        return Err(CoreError::invalid(format!(
            "batch_size {batch_size} outside [1, {s}]"
        )));
    }
    let mut order: Vec<usize> = (0..s).collect();
    rng.shuffle(&mut order);
    let n_batches = s / batch_size;
    let plan = BatchPlan {
        batch_size,
        order,
        n_batches,
    };
    let iter = BatchIter {
        dataset,
        plan: plan.clone(),
        next: 0,
    };
    Ok((plan, iter))
}

pub struct BatchIter<'d> {
    dataset: &'d Dataset,
    plan: BatchPlan,
    next: usize,
}

impl Iterator for BatchIter<'_> {
    type Item = MiniBatch;

    fn next(&mut self) -> Option<MiniBatch> {
        if self.next >= self.plan.n_batches {
            return None;
        }
        let b = self.plan.batch_size;
        let idx = &self.plan.order[self.next * b..(self.next + 1) * b];
        self.next += 1;
        Some(MiniBatch {
            images: self.dataset.images.select_rows(idx),
            labels: idx.iter().map(|&i| self.dataset.labels[i]).collect(),
        })
    }
}

/// Stratified draw of k samples without replacement: class quotas by
/// largest remainder, then a per-class shuffle. Selected indices are
/// returned in their original order, so k = S is the identity.
pub fn subset(dataset: &Dataset, k: usize, rng: &mut RngStream) -> Result<Dataset> {
    let s = dataset.n_samples();
    if k == 0 || k > s {
        return Err(CoreError::invalid(format!("subset k {k} outside [1, {s}]")));
    }
    if k == s {
        return Ok(dataset.clone());
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
    for (i, &l) in dataset.labels.iter().enumerate() {
        by_class[l as usize].push(i);
    }
    // Largest-remainder apportionment of k across classes.
    let mut quota = vec![0usize; NUM_CLASSES];
    let mut rema: Vec<(f64, usize)> = Vec::new();
    let mut assigned = 0;
    for (c, members) in by_class.iter().enumerate() {
        let exact = k as f64 * members.len() as f64 / s as f64;
        quota[c] = (exact.floor() as usize).min(members.len());
        assigned += quota[c];
        rema.push((exact - exact.floor(), c));
    }
    rema.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut left = k - assigned;
    for &(_, c) in rema.iter().cycle() {
        if left == 0 {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            left -= 1;
        }
    }
    let mut chosen = Vec::with_capacity(k);
    for (c, members) in by_class.iter().enumerate() {
        let mut pool = members.clone();
        rng.shuffle(&mut pool);
        chosen.extend_from_slice(&pool[..quota[c]]);
    }
    chosen.sort_unstable();
    Ok(dataset.take(&chosen))
}
