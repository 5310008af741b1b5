//! Real-line quadrature: Gauss-Legendre rules with node doubling.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence. Good to machine precision for n up to a few
/// thousand.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // n == 1: p1 = x, p0 = 1
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrates `f` over `[a, b]` with an n-point Gauss-Legendre rule.
pub fn gauss_on<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..n {
        acc += w[i] * f(mid + half * x[i]);
    }
    acc * half
}

/// Integrates `f` over `[a, b]`, doubling the Gauss rule from `start` points
/// until two successive estimates differ by less than
/// `max(abs_tol, rel_tol * |estimate|)`.
pub fn adaptive_gauss<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    start: usize,
    max_points: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let mut n = start.max(2);
    let mut prev = gauss_on(f, a, b, n);
    loop {
        n *= 2;
        let cur = gauss_on(f, a, b, n);
        if (cur - prev).abs() <= abs_tol.max(rel_tol * cur.abs()) {
            return Ok(cur);
        }
        if n >= max_points {
            return Err(Error::NonConvergence {
                nodes: n,
                last: num_complex::Complex64::new(cur, 0.0),
                prev: num_complex::Complex64::new(prev, 0.0),
            });
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_5_nodes() {
        let (x, w) = gauss_legendre(5);
        assert_relative_eq!(x[0], -0.906_179_845_938_664, epsilon = 1e-14);
        assert_relative_eq!(x[2], 0.0, epsilon = 1e-14);
        assert_relative_eq!(w[2], 0.568_888_888_888_888_9, epsilon = 1e-14);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // 2n-1 degree exactness
        let f = |x: f64| x.powi(7) - 3.0 * x.powi(4) + x;
        let exact = {
            let prim = |x: f64| x.powi(8) / 8.0 - 3.0 * x.powi(5) / 5.0 + x * x / 2.0;
            prim(2.0) - prim(-1.0)
        };
        assert_relative_eq!(gauss_on(&f, -1.0, 2.0, 4), exact, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_cosine() {
        let v = adaptive_gauss(&|x: f64| x.cos(), 0.0, 1.0, 4, 1 << 12, 1e-12, 1e-14).unwrap();
        assert_relative_eq!(v, 1.0f64.sin(), epsilon = 1e-12);
    }
}
