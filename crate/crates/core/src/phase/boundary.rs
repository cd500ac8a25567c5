//! Analytic order-chaos boundary: for each J0, the J at which the
//! boundary criterion crosses 1.

use crate::numerics::quadrature::QuadratureRule;
use crate::phase::meanfield::{boundary_criterion, meanfield_solve, DEFAULT_MAX_ITER};
use crate::phase::PhasePoint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Bracket searched in J. Below 0.05 the criterion is ~J^2, far from 1;
/// 5 covers the figure extent with margin.
const J_LO: f64 = 0.05;
const J_HI: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub j0: f64,
    /// J where the criterion equals 1; meaningful only when `found`.
    pub j_boundary: f64,
    pub found: bool,
}

/// Criterion minus 1 at (j0, j), on the solved closure. None when the
/// solve does not certify convergence.
fn excess(j0: f64, j: f64, rule: &QuadratureRule, tol: f64) -> Option<f64> {
    let point = PhasePoint { j0, j };
    let sol = meanfield_solve(point, rule, tol, DEFAULT_MAX_ITER);
    boundary_criterion(point, &sol, rule).ok().map(|c| c - 1.0)
}

fn locate(j0: f64, rule: &QuadratureRule, tol: f64) -> BoundaryPoint {
    let not_found = BoundaryPoint {
        j0,
        j_boundary: f64::NAN,
        found: false,
    };
    let (Some(f_lo), Some(f_hi)) = (excess(j0, J_LO, rule, tol), excess(j0, J_HI, rule, tol))
    else {
        return not_found;
    };
    if f_lo.signum() == f_hi.signum() {
        return not_found;
    }
    let (mut lo, mut hi) = (J_LO, J_HI);
    // Resolve J well below the contract's 1e-6 so the criterion at the
    // returned point is 1 to high accuracy.
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        let Some(f_mid) = excess(j0, mid, rule, tol) else {
            return not_found;
        };
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    BoundaryPoint {
        j0,
        j_boundary: 0.5 * (lo + hi),
        found: true,
    }
}

/// For each J0, bisects the boundary criterion to 1 in J over
/// [0.05, 5], re-solving the self-consistency at every probe. Points with
/// no sign change in the bracket are reported as not found.
pub fn boundary_curve(j0_values: &[f64], rule: &QuadratureRule, tol: f64) -> Vec<BoundaryPoint> {
    j0_values
        .par_iter()
        .map(|&j0| locate(j0, rule, tol))
        .collect()
}

/// CSV lines for the boundary table: header `j0,j_boundary,found`.
pub fn boundary_csv(points: &[BoundaryPoint]) -> String {
    let mut out = String::from("j0,j_boundary,found\n");
    for p in points {
        if p.found {
            out.push_str(&format!("{},{},true\n", p.j0, p.j_boundary));
        } else {
            out.push_str(&format!("{},,false\n", p.j0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::meanfield::DEFAULT_TOL;

    #[test]
    fn anchor_at_j0_zero_is_one() {
        let rule = QuadratureRule::default_rule();
        let pts = boundary_curve(&[0.0], &rule, DEFAULT_TOL);
        assert!(pts[0].found);
        assert!(
            (pts[0].j_boundary - 1.0).abs() < 1e-6,
            "boundary {}",
            pts[0].j_boundary
        );
    }

    #[test]
    fn symmetric_in_j0() {
        let rule = QuadratureRule::default_rule();
        for j0 in [0.4, 2.0] {
            let pts = boundary_curve(&[j0, -j0], &rule, DEFAULT_TOL);
            assert!(pts[0].found && pts[1].found, "j0={j0}");
            assert!(
                (pts[0].j_boundary - pts[1].j_boundary).abs() < 1e-9,
                "j0={j0}: {} vs {}",
                pts[0].j_boundary,
                pts[1].j_boundary
            );
        }
    }

    #[test]
    fn criterion_is_one_at_found_points() {
        let rule = QuadratureRule::default_rule();
        for j0 in [0.0, 0.3, 0.8, 2.0, 2.5] {
            let pts = boundary_curve(&[j0], &rule, DEFAULT_TOL);
            assert!(pts[0].found, "j0={j0} not found");
            let point = PhasePoint {
                j0,
                j: pts[0].j_boundary,
            };
            let sol = meanfield_solve(point, &rule, DEFAULT_TOL, DEFAULT_MAX_ITER);
            let c = boundary_criterion(point, &sol, &rule).unwrap();
            assert!((c - 1.0).abs() < 1e-6, "j0={j0}: criterion {c}");
        }
    }

    #[test]
    fn paramagnetic_segment_sits_at_one() {
        // At mu = 0 the closure loses its J0 dependence, so the boundary
        // is exactly J = 1 across the small-|J0| segment.
        let rule = QuadratureRule::default_rule();
        for j0 in [0.0, 0.5, 0.9] {
            let pts = boundary_curve(&[j0], &rule, DEFAULT_TOL);
            assert!(pts[0].found);
            assert!(
                (pts[0].j_boundary - 1.0).abs() < 1e-6,
                "j0={j0}: {}",
                pts[0].j_boundary
            );
        }
    }

    #[test]
    fn csv_format() {
        let pts = vec![
            BoundaryPoint {
                j0: 0.0,
                j_boundary: 1.0,
                found: true,
            },
            BoundaryPoint {
                j0: 9.0,
                j_boundary: f64::NAN,
                found: false,
            },
        ];
        let csv = boundary_csv(&pts);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("j0,j_boundary,found"));
        assert_eq!(lines.next(), Some("0,1,true"));
        assert_eq!(lines.next(), Some("9,,false"));
    }
}
