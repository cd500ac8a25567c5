//! Gaussian quadrature for the standard normal measure
//! `Dz = (1/sqrt(2*pi)) exp(-z^2/2) dz`.
//!
//! Nodes and weights come from the Gauss-Hermite rule for weight
//! `exp(-x^2)` (roots found by Newton iteration on the orthonormal Hermite
//! recurrence), then rescaled by `z = sqrt(2) x`, `w -> w / sqrt(pi)`. A
//! rule of order `n` integrates polynomials up to degree `2n - 1` exactly.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss rule of the given order for the standard normal measure.
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(CoreError::invalid(format!(
                "quadrature order must be >= 2, got {order}"
            )));
        }
        let (xs, ws) = hermite_nodes(order);
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut nodes: Vec<f64> = xs.iter().map(|x| sqrt2 * x).collect();
        let mut weights: Vec<f64> = ws
            .iter()
            .map(|w| w / std::f64::consts::PI.sqrt())
            .collect();

        // Exact symmetrization: mirror the positive half so odd integrands
        // cancel to the bit, then renormalize so the weights sum to 1.
        symmetrize(&mut nodes, &mut weights);
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(QuadratureRule { nodes, weights })
    }

    /// Default rule used throughout: order 100, far beyond what the smooth
    /// boundary integrand needs.
    pub fn default_rule() -> Self {
        QuadratureRule::gauss_hermite(100).expect("order 100 is valid")
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `integral Dz f(z)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

/// Nodes and weights of the n-point Gauss-Hermite rule for weight
/// exp(-x^2), via Newton iteration on the orthonormal recurrence
/// `p_{j+1} = x sqrt(2/(j+1)) p_j - sqrt(j/(j+1)) p_{j-1}`.
fn hermite_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = (n + 1) / 2;
    let mut z = 0.0_f64;
    for i in 0..m {
        // Asymptotic initial guesses for the roots, largest first.
        z = match i {
            0 => {
                let a = (2 * n + 1) as f64;
                a.sqrt() - 1.85575 * a.powf(-1.0 / 6.0)
            }
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * xs[0],
            3 => 1.91 * z - 0.91 * xs[1],
            _ => 2.0 * z - xs[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * (1.0 + z.abs()) {
                break;
            }
        }
        xs[i] = z;
        xs[n - 1 - i] = -z;
        ws[i] = 2.0 / (pp * pp);
        ws[n - 1 - i] = ws[i];
    }
    (xs, ws)
}

/// Forces node pairs to exact +/- mirrors and equal weights; zero center
/// node for odd orders.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let mag = 0.5 * (nodes[i].abs() + nodes[j].abs());
        let sign = if nodes[i] >= 0.0 { 1.0 } else { -1.0 };
        nodes[i] = sign * mag;
        nodes[j] = -sign * mag;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::trapezoid_normal;

    /// Double factorial (k-1)!! for even k: the standard normal moments.
    fn normal_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let mut acc = 1.0;
        let mut i = k as i64 - 1;
        while i > 1 {
            acc *= i as f64;
            i -= 2;
        }
        acc
    }

    #[test]
    fn order_below_two_rejected() {
        assert!(QuadratureRule::gauss_hermite(1).is_err());
        assert!(QuadratureRule::gauss_hermite(0).is_err());
    }

    #[test]
    fn weights_are_normalized() {
        for order in [2, 3, 10, 31, 100] {
            let rule = QuadratureRule::gauss_hermite(order).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "order {order}: sum {total}");
        }
    }

    #[test]
    fn nodes_are_symmetric() {
        let rule = QuadratureRule::gauss_hermite(100).unwrap();
        let n = rule.order();
        for i in 0..n / 2 {
            assert_eq!(rule.nodes()[i], -rule.nodes()[n - 1 - i]);
        }
    }

    #[test]
    fn unit_mass_and_unit_variance() {
        let rule = QuadratureRule::gauss_hermite(100).unwrap();
        assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!((rule.integrate(|z| z * z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_moments_match_double_factorial() {
        for order in [4usize, 7, 12, 50] {
            let rule = QuadratureRule::gauss_hermite(order).unwrap();
            for k in 0..(2 * order).min(24) {
                let got = rule.integrate(|z| z.powi(k as i32));
                let want = normal_moment(k);
                // Odd moments cancel large +/- terms, so the noise floor
                // scales with the magnitude of the neighboring even moment.
                let scale = want.abs().max(normal_moment(k + (k % 2))).max(1.0);
                assert!(
                    (got - want).abs() < 1e-10 * scale,
                    "order {order}, moment {k}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn sech4_matches_trapezoid_oracle() {
        let rule = QuadratureRule::gauss_hermite(100).unwrap();
        let sech4 = |z: f64| {
            let s = 1.0 / (0.7 * z).cosh();
            s.powi(4)
        };
        let got = rule.integrate(sech4);
        let want = trapezoid_normal(sech4, 1e-13);
        assert!(
            (got - want).abs() < 1e-10 * want.abs(),
            "got {got}, want {want}"
        );
    }

    #[test]
    fn odd_integrands_cancel_to_rounding() {
        let rule = QuadratureRule::gauss_hermite(64).unwrap();
        let got = rule.integrate(|z| (0.9 * z).tanh());
        assert!(got.abs() < 1e-15, "odd integral {got}");
    }
}
