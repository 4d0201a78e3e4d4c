//! Central finite-difference gradient checking in 64-bit precision.

pub const DEFAULT_EPS: f64 = 1e-5;

/// Central-difference estimate of the gradient of `f` at `point`.
pub fn numerical_gradient(f: impl Fn(&[f64]) -> f64, point: &[f64], eps: f64) -> Vec<f64> {
    let mut x = point.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + eps;
            let up = f(&x);
            x[i] = orig - eps;
            let down = f(&x);
            x[i] = orig;
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Magnitude below which a gradient coordinate is compared in absolute terms.
/// Central differences of an O(1) loss carry roundoff near `1e-11` at
/// `eps = 1e-5`, so smaller gradients have no meaningful relative error.
pub const RELATIVE_FLOOR: f64 = 1e-6;

/// Largest per-coordinate `|a − n| / max(|a|, |n|, RELATIVE_FLOOR)`.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient length mismatch");
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(RELATIVE_FLOOR))
        .fold(0.0, f64::max)
}

/// Compares the analytic gradient returned by `f` (value, gradient) against
/// central differences of its value at `point`.
pub fn grad_check(f: impl Fn(&[f64]) -> (f64, Vec<f64>), point: &[f64], eps: f64) -> f64 {
    let (_, analytic) = f(point);
    let numeric = numerical_gradient(|x| f(x).0, point, eps);
    max_relative_error(&analytic, &numeric)
}
