//! Numerical building blocks shared by the modules.

pub mod cdf;
pub mod isotonic;
pub mod quadrature;
pub mod tridiag;

pub use cdf::CdfMesh;
pub use isotonic::isotonic_project;
pub use quadrature::{integrate, integrate_best_effort, integrate_pieces, QuadOptions, QuadResult};
pub use tridiag::solve_tridiagonal;

/// Safeguarded bisection for a root of a monotone function on `[lo, hi]`.
/// `f(lo)` and `f(hi)` must bracket zero.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> f64 {
    let mut flo = f(lo);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Index `j` with `xs[j] <= x < xs[j+1]`, clamped to the valid interval range.
pub fn locate(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    if n < 2 || x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Piecewise-linear interpolation of `(xs, ys)` at `x`, constant outside.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 0 {
        return f64::NAN;
    }
    if n == 1 || x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = locate(xs, x);
    let t = (x - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + t * (ys[j + 1] - ys[j])
}

/// Second-order first-derivative weights at interior node `i` of a non-uniform grid.
pub fn first_derivative_weights(hm: f64, hp: f64) -> (f64, f64, f64) {
    let s = hm + hp;
    (-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s))
}

/// Three-point second-derivative weights at an interior node of a non-uniform grid.
pub fn second_derivative_weights(hm: f64, hp: f64) -> (f64, f64, f64) {
    let s = hm + hp;
    (2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s))
}

/// Discrete first derivative of `y` on grid `x`: centered inside, second-order one-sided at ends.
pub fn derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n == 2 {
        let s = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    for i in 1..n - 1 {
        let (a, b, c) = first_derivative_weights(x[i] - x[i - 1], x[i + 1] - x[i]);
        d[i] = a * y[i - 1] + b * y[i] + c * y[i + 1];
    }
    d[0] = one_sided_start(x[0], x[1], x[2], y[0], y[1], y[2]);
    d[n - 1] = -one_sided_start(-x[n - 1], -x[n - 2], -x[n - 3], y[n - 1], y[n - 2], y[n - 3]);
    d
}

/// Second-order one-sided derivative at `x0` from three points.
fn one_sided_start(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    let h1 = x1 - x0;
    let h2 = x2 - x0;
    let w1 = h2 / (h1 * (h2 - h1));
    let w2 = -h1 / (h2 * (h2 - h1));
    let w0 = -(w1 + w2);
    w0 * y0 + w1 * y1 + w2 * y2
}

/// Discrete second derivative at interior nodes; end values copy their neighbours.
pub fn second_derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    for i in 1..n - 1 {
        let (a, b, c) = second_derivative_weights(x[i] - x[i - 1], x[i + 1] - x[i]);
        d[i] = a * y[i - 1] + b * y[i] + c * y[i + 1];
    }
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    d
}
