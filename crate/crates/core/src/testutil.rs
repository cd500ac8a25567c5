//! Shared test-only oracles, independent of the implementation paths they
//! check.

/// Integral of f against the standard normal density, by composite
/// trapezoid on [-10, 10] with interval doubling until the relative change
/// is below tol.
pub fn trapezoid_normal(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let g = |z: f64| f(z) * phi(z);
    let (a, b) = (-10.0, 10.0);
    let mut n = 64usize;
    let mut prev = f64::NAN;
    loop {
        let h = (b - a) / n as f64;
        let mut acc = 0.5 * (g(a) + g(b));
        for k in 1..n {
            acc += g(a + k as f64 * h);
        }
        let cur = acc * h;
        if prev.is_finite() && (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
        n *= 2;
        assert!(n <= 1 << 24, "trapezoid oracle failed to converge");
    }
}
