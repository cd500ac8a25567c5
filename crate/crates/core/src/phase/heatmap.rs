//! Numerical phase diagram: a grid of perturbation-growth probes on
//! sampled weight matrices, cross-labeled by the analytic criterion.

use crate::error::{CoreError, Result};
use crate::numerics::matrix::gaussian_matrix;
use crate::numerics::quadrature::QuadratureRule;
use crate::numerics::rng::{streams, RngStream};
use crate::phase::meanfield::{
    boundary_criterion, meanfield_solve, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::phase::{asymptotic_distance, PhasePoint, ORDERED_RATIO_THRESHOLD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Ordered,
    Chaotic,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Ordered => write!(f, "ordered"),
            Phase::Chaotic => write!(f, "chaotic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub point: PhasePoint,
    pub initial_distance: f64,
    pub final_distance: f64,
    pub ratio: f64,
    /// Left side of the analytic boundary condition at this (J0, J).
    pub criterion: f64,
    /// Distance-based label: ordered iff ratio < the ordered threshold.
    pub classification: Phase,
}

impl PhaseCell {
    /// Label implied by the analytic criterion alone.
    pub fn criterion_phase(&self) -> Phase {
        if self.criterion > 1.0 {
            Phase::Chaotic
        } else {
            Phase::Ordered
        }
    }
}

/// Rectangular grid specification; endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub j0_min: f64,
    pub j0_max: f64,
    pub j0_steps: usize,
    pub j_min: f64,
    pub j_max: f64,
    pub j_steps: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        PhaseGrid {
            j0_min: -2.5,
            j0_max: 2.5,
            j0_steps: 50,
            j_min: 0.1,
            j_max: 2.5,
            j_steps: 50,
        }
    }
}

impl PhaseGrid {
    pub fn points(&self) -> Vec<PhasePoint> {
        let mut pts = Vec::with_capacity(self.j0_steps * self.j_steps);
        for i in 0..self.j0_steps {
            for k in 0..self.j_steps {
                pts.push(PhasePoint {
                    j0: linspace(self.j0_min, self.j0_max, self.j0_steps, i),
                    j: linspace(self.j_min, self.j_max, self.j_steps, k),
                });
            }
        }
        pts
    }

    pub fn validate(&self) -> Result<()> {
        if self.j0_steps < 2 || self.j_steps < 2 {
            return Err(CoreError::invalid(
                "phase grid needs at least 2 steps per axis",
            ));
        }
        if self.j_min < 0.0 || self.j_max < self.j_min || self.j0_max < self.j0_min {
            return Err(CoreError::invalid("phase grid ranges are inverted"));
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, steps: usize, i: usize) -> f64 {
    lo + (hi - lo) * i as f64 / (steps - 1) as f64
}

/// Evaluates every grid cell: sample W at the cell's (J0, J), probe
/// perturbation growth from a standard-normal start, and attach the
/// analytic criterion. Cells are independent, each with streams derived
/// from (seed, cell index), so the result is deterministic for any worker
/// count.
pub fn phase_heatmap(
    grid: &PhaseGrid,
    n: usize,
    tau: usize,
    noise_std: f64,
    seed: u64,
) -> Result<Vec<PhaseCell>> {
    grid.validate()?;
    if n == 0 {
        return Err(CoreError::invalid("n must be positive"));
    }
    let rule = QuadratureRule::default_rule();
    let points = grid.points();
    points
        .par_iter()
        .enumerate()
        .map(|(idx, &point)| cell(point, idx as u64, n, tau, noise_std, seed, &rule))
        .collect()
}

fn cell(
    point: PhasePoint,
    idx: u64,
    n: usize,
    tau: usize,
    noise_std: f64,
    seed: u64,
    rule: &QuadratureRule,
) -> Result<PhaseCell> {
    let base = streams::HEATMAP_BASE + 4 * idx;
    let mut w_rng = RngStream::new(seed, base);
    let mut x_rng = RngStream::new(seed, base + 1);
    let mut noise_rng = RngStream::new(seed, base + 2);
    let nf = n as f64;
    let w = gaussian_matrix(n, n, point.j0 / nf, point.j / nf.sqrt(), &mut w_rng)?;
    let x0 = x_rng.normal_vec(n, 0.0, 1.0);
    let probe = asymptotic_distance(&w, &x0, noise_std, tau, &mut noise_rng)?;
    let sol = meanfield_solve(point, rule, DEFAULT_TOL, DEFAULT_MAX_ITER);
    let criterion = boundary_criterion(point, &sol, rule)?;
    let classification = if probe.ratio < ORDERED_RATIO_THRESHOLD {
        Phase::Ordered
    } else {
        Phase::Chaotic
    };
    Ok(PhaseCell {
        point,
        initial_distance: probe.initial_distance,
        final_distance: probe.final_distance,
        ratio: probe.ratio,
        criterion,
        classification,
    })
}

/// CSV lines for the heatmap: header
/// `j0,j,initial_distance,final_distance,ratio,criterion,classification`.
pub fn heatmap_csv(cells: &[PhaseCell]) -> String {
    let mut out =
        String::from("j0,j,initial_distance,final_distance,ratio,criterion,classification\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.point.j0,
            c.point.j,
            c.initial_distance,
            c.final_distance,
            c.ratio,
            c.criterion,
            c.classification
        ));
    }
    out
}

/// Fraction of cells away from the boundary band on which the
/// distance-based and criterion-based labels agree.
pub fn classification_agreement(cells: &[PhaseCell], band: f64) -> (f64, usize) {
    let away: Vec<&PhaseCell> = cells
        .iter()
        .filter(|c| (c.criterion - 1.0).abs() > band)
        .collect();
    if away.is_empty() {
        return (1.0, 0);
    }
    let agree = away
        .iter()
        .filter(|c| c.classification == c.criterion_phase())
        .count();
    (agree as f64 / away.len() as f64, away.len())
}
