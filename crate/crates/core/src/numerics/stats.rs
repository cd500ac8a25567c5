//! Weight-matrix phase coordinates and small descriptive helpers.
//!
//! For an N x N weight matrix with entry mean m and entry variance v the
//! phase coordinates are `J0 = N * m` and `J = sqrt(N * v)`; variance is
//! the population variance (divide by the count).

use crate::error::{CoreError, Result};
use crate::numerics::matrix::Matrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightStats {
    pub j0: f64,
    pub j: f64,
    pub j_squared: f64,
}

/// Extracts (J0, J, J^2) from an n x n weight matrix.
pub fn weight_stats(w: &Matrix, n: usize) -> Result<WeightStats> {
    if n == 0 {
        return Err(CoreError::shape("weight_stats: n must be positive"));
    }
    if w.rows() != n || w.cols() != n {
        return Err(CoreError::shape(format!(
            "weight_stats: expected {n}x{n}, got {}x{}",
            w.rows(),
            w.cols()
        )));
    }
    let (m, v) = mean_variance(w.as_slice());
    let j_squared = n as f64 * v;
    Ok(WeightStats {
        j0: n as f64 * m,
        j: j_squared.sqrt(),
        j_squared,
    })
}

/// Two-pass mean and population variance.
pub fn mean_variance(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    if data.is_empty() {
        return (0.0, 0.0);
    }
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

pub fn mean(data: &[f64]) -> f64 {
    mean_variance(data).0
}

pub fn std_dev(data: &[f64]) -> f64 {
    mean_variance(data).1.sqrt()
}
