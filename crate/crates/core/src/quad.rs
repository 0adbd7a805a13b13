//! Deterministic quadrature: composite Gauss–Legendre panels with an
//! a-posteriori error estimate from panel refinement.

use crate::error::{CoreError, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and its derivative by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre integral of `f` over [a, b] with `panels`
/// equal panels of a 32-point rule.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(32);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let left = a + p as f64 * h;
        let mid = left + 0.5 * h;
        let half = 0.5 * h;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            panel += w * f(mid + half * x);
        }
        total += panel * half;
    }
    total
}

/// Integrate with refinement until two successive panel counts agree within
/// `tol` relative to the integral's magnitude; returns (value, error bound).
pub fn integrate_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut panels = 4;
    let mut prev = integrate(f, a, b, panels);
    for _ in 0..8 {
        panels *= 2;
        let next = integrate(f, a, b, panels);
        let err = (next - prev).abs();
        let scale = next.abs().max(1e-300);
        if err <= tol * scale {
            return Ok((next, err));
        }
        prev = next;
    }
    let next = integrate(f, a, b, panels * 2);
    let err = (next - prev).abs();
    if err <= tol * next.abs().max(1e-300) {
        Ok((next, err))
    } else {
        Err(CoreError::QuadratureNotConverged {
            achieved: err / next.abs().max(1e-300),
            requested: tol,
        })
    }
}
