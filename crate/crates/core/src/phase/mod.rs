//! Dynamics of the map `x -> tanh(W x)`: trajectory iteration,
//! perturbation-growth probes, empirical attractor statistics, the
//! Jacobian-norm criterion, the mean-field closure, and the analytic
//! order-chaos boundary.

pub mod boundary;
pub mod heatmap;
pub mod meanfield;

pub use boundary::{boundary_curve, BoundaryPoint};
pub use heatmap::{phase_heatmap, Phase, PhaseCell, PhaseGrid};
pub use meanfield::{boundary_criterion, meanfield_solve, Branch, MeanFieldSolution};

use crate::error::{CoreError, Result};
use crate::numerics::matrix::Matrix;
use crate::numerics::rng::RngStream;
use serde::{Deserialize, Serialize};

/// Two nearby trajectories are called ordered when the final distance is
/// below this fraction of the initial distance after `tau` steps.
pub const ORDERED_RATIO_THRESHOLD: f64 = 0.01;

/// Coordinates in the phase diagram: `J0 = N * mean(W)`,
/// `J = sqrt(N * var(W))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub j0: f64,
    pub j: f64,
}

impl PhasePoint {
    pub fn new(j0: f64, j: f64) -> Result<Self> {
        if !(j0.is_finite() && j.is_finite()) || j < 0.0 {
            return Err(CoreError::invalid(format!(
                "phase point (j0={j0}, j={j}) must be finite with j >= 0"
            )));
        }
        Ok(PhasePoint { j0, j })
    }
}

/// Largest f64 strictly below 1. tanh saturates to exactly 1.0 for
/// |x| > ~19, so outputs are clamped to keep every component in the open
/// interval (-1, 1).
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
pub(crate) fn tanh_open(x: f64) -> f64 {
    x.tanh().clamp(-ONE_BELOW, ONE_BELOW)
}

fn check_square_state(w: &Matrix, x0: &[f64]) -> Result<()> {
    if w.rows() != w.cols() {
        return Err(CoreError::shape(format!(
            "map matrix must be square, got {}x{}",
            w.rows(),
            w.cols()
        )));
    }
    if x0.is_empty() || x0.len() != w.rows() {
        return Err(CoreError::shape(format!(
            "state length {} does not match matrix size {}",
            x0.len(),
            w.rows()
        )));
    }
    Ok(())
}

/// Applies `x -> tanh(W x)` once, in place.
fn step_map(w: &Matrix, x: &mut Vec<f64>) {
    let pre = w.matvec(x).expect("shape checked by caller");
    x.clear();
    x.extend(pre.into_iter().map(tanh_open));
}

/// Iterates the map `steps` times from `x0`.
pub fn iterate_map(w: &Matrix, x0: &[f64], steps: usize) -> Result<Vec<f64>> {
    check_square_state(w, x0)?;
    let mut x = x0.to_vec();
    for _ in 0..steps {
        step_map(w, &mut x);
    }
    Ok(x)
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Result of a perturbation-growth probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceProbe {
    pub initial_distance: f64,
    pub final_distance: f64,
    /// final / initial; 0 when both distances collapse to 0.
    pub ratio: f64,
}

impl DistanceProbe {
    pub fn is_ordered(&self) -> bool {
        self.ratio < ORDERED_RATIO_THRESHOLD
    }
}

/// Perturbs `x0` by i.i.d. Gaussian noise, iterates both trajectories
/// `tau` steps, and reports the initial and final L2 distances.
pub fn asymptotic_distance(
    w: &Matrix,
    x0: &[f64],
    noise_std: f64,
    tau: usize,
    rng: &mut RngStream,
) -> Result<DistanceProbe> {
    check_square_state(w, x0)?;
    if noise_std <= 0.0 {
        return Err(CoreError::invalid(format!(
            "noise_std must be positive, got {noise_std}"
        )));
    }
    if tau < 1 {
        return Err(CoreError::invalid("tau must be at least 1"));
    }
    let mut a = x0.to_vec();
    let mut b: Vec<f64> = x0.iter().map(|&v| v + noise_std * rng.normal()).collect();
    let initial = l2_distance(&a, &b);
    for _ in 0..tau {
        step_map(w, &mut a);
        step_map(w, &mut b);
    }
    let final_distance = l2_distance(&a, &b);
    let ratio = if final_distance == 0.0 {
        0.0
    } else {
        final_distance / initial
    };
    Ok(DistanceProbe {
        initial_distance: initial,
        final_distance,
        ratio,
    })
}

/// Per-unit time statistics of the attractor reached from `x0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalAttractor {
    /// Time-averaged activity of each unit.
    pub mu_per_unit: Vec<f64>,
    /// Time standard deviation of each unit.
    pub sigma_per_unit: Vec<f64>,
    /// Mean of the per-unit means.
    pub mu: f64,
    /// Mean of the squared per-unit means.
    pub q0: f64,
}

/// Time-averages the trajectory after a burn-in: `mu_i` over `samples`
/// post-burn-in iterations, aggregated to `mu` and `q0`.
pub fn empirical_attractor(
    w: &Matrix,
    x0: &[f64],
    burn_in: usize,
    samples: usize,
) -> Result<EmpiricalAttractor> {
    check_square_state(w, x0)?;
    if burn_in < 1 || samples < 1 {
        return Err(CoreError::invalid(
            "burn_in and samples must both be at least 1",
        ));
    }
    let n = x0.len();
    let mut x = iterate_map(w, x0, burn_in)?;
    let mut sum = vec![0.0; n];
    let mut sumsq = vec![0.0; n];
    for _ in 0..samples {
        step_map(w, &mut x);
        for i in 0..n {
            sum[i] += x[i];
            sumsq[i] += x[i] * x[i];
        }
    }
    let sf = samples as f64;
    let mu_per_unit: Vec<f64> = sum.iter().map(|s| s / sf).collect();
    let sigma_per_unit: Vec<f64> = sumsq
        .iter()
        .zip(&mu_per_unit)
        .map(|(ss, m)| (ss / sf - m * m).max(0.0).sqrt())
        .collect();
    let mu = mu_per_unit.iter().sum::<f64>() / n as f64;
    let q0 = mu_per_unit.iter().map(|m| m * m).sum::<f64>() / n as f64;
    Ok(EmpiricalAttractor {
        mu_per_unit,
        sigma_per_unit,
        mu,
        q0,
    })
}

/// `(1/sqrt(N)) ||J*||` of the map evaluated at the attractor mean:
/// `sqrt( (1/N) sum_i sech^4(sum_j W_ij mu_j) * sum_j W_ij^2 )`.
pub fn jacobian_norm(w: &Matrix, mu_per_unit: &[f64]) -> Result<f64> {
    check_square_state(w, mu_per_unit)?;
    let n = w.rows();
    let pre = w.matvec(mu_per_unit)?;
    let mut acc = 0.0;
    for i in 0..n {
        let sech2 = {
            let c = pre[i].cosh();
            1.0 / (c * c)
        };
        let row_sumsq: f64 = w.row(i).iter().map(|v| v * v).sum();
        acc += sech2 * sech2 * row_sumsq;
    }
    Ok((acc / n as f64).sqrt())
}
