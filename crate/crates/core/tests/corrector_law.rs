//! The scale-by-scale corrector: driver law identification, the norm of
//! the gradient recursion against the scale function, and the martingale
//! structure of the proxy corrector.

use sl2drift::corrector::*;
use sl2drift::field::{sample_field, SpectralField};
use sl2drift::stats::*;

const SIDE: f64 = 128.0 * std::f64::consts::PI;

fn run_flow(epsilon: f64, l_top: f64, shells_per_efold: usize, seed: u64) -> GradientFlow {
    let field = sample_field(epsilon, l_top, SIDE, 512, seed).unwrap();
    let grid = lnl_grid(l_top, shells_per_efold);
    let bins = shell_bins(&field, &grid).unwrap();
    let mut flow = GradientFlow::new(epsilon);
    for (j, bin) in bins.iter().enumerate() {
        flow.advance(&field, bin, grid[j + 1].exp());
    }
    flow
}

#[test]
fn scaled_driver_has_canonical_covariance_per_lnl() {
    // The rescaled shell driver (√2 λ̃/ε)·∇dφ(0), summed over [1, e],
    // must have covariance lnL · diag(1/4, 1/4, 1/2).
    let n_real = 3_000;
    let eps = 0.5;
    let samples: Vec<[f64; 6]> = indexed_map(n_real, |i| {
        let flow = run_flow(eps, std::f64::consts::E, 16, 400_000 + i as u64);
        let d = flow.scaled_driver;
        [
            d.a1 * d.a1,
            d.a2 * d.a2,
            d.a3 * d.a3,
            d.a1 * d.a2,
            d.a1 * d.a3,
            d.a2 * d.a3,
        ]
    });
    let expect = [0.25, 0.25, 0.5, 0.0, 0.0, 0.0];
    for slot in 0..6 {
        let s = mc_mean(samples.iter().map(|v| v[slot])).unwrap();
        let z = (s.mean() - expect[slot]) / s.std_error();
        assert!(
            z.abs() <= 4.0,
            "driver cov slot {slot}: {} z = {z}",
            s.mean()
        );
    }
}

#[test]
fn gradient_recursion_norm_tracks_scale_function() {
    let n_real = 2_000;
    let l_top = (2.0f64).exp();
    for eps in [0.5, 0.3] {
        let sm = ScaleMap::new(eps);
        let vals: Vec<[f64; 2]> = indexed_map(n_real, |i| {
            let field = sample_field(eps, l_top, SIDE, 512, 600_000 + i as u64).unwrap();
            let grid = lnl_grid(l_top, 32);
            let bins = shell_bins(&field, &grid).unwrap();
            let mut flow = GradientFlow::new(eps);
            let mut at_e = 0.0;
            for (j, bin) in bins.iter().enumerate() {
                flow.advance(&field, bin, grid[j + 1].exp());
                if (grid[j + 1] - 1.0).abs() < 1e-9 {
                    at_e = flow.f_matrix.frobenius_sq();
                }
            }
            [at_e, flow.f_matrix.frobenius_sq()]
        });
        for (slot, l) in [(0usize, std::f64::consts::E), (1, l_top)] {
            let s = mc_mean(vals.iter().map(|v| v[slot])).unwrap();
            let reference = 2.0 * sm.lambda_of(l * l - 1.0);
            let rel = (s.mean() - reference) / reference;
            assert!(
                rel.abs() <= 0.05,
                "eps = {eps}: E|F_L|² at L = {l}: {} vs {reference} ({:+.2}%)",
                s.mean(),
                100.0 * rel
            );
        }
    }
}

#[test]
fn proxy_increments_are_centered() {
    // Martingale property of φ̃: increments over a later shell block have
    // zero mean at fixed probe points.
    let side = 32.0 * std::f64::consts::PI;
    let n_real = 400;
    let mut acc = vec![RunningStats::new(); 4];
    for i in 0..n_real {
        let field = sample_field(0.5, 0.0, side, 128, 800_000 + i as u64).unwrap();
        let mut st = CorrectorState::new(&field);
        st.advance(&field, 1.6).unwrap();
        let before = [st.tilde_at(5, 9), st.tilde_at(40, 70)];
        st.advance(&field, 2.6).unwrap();
        let after = [st.tilde_at(5, 9), st.tilde_at(40, 70)];
        for p in 0..2 {
            for c in 0..2 {
                acc[2 * p + c].push(after[p][c] - before[p][c]);
            }
        }
    }
    for (k, s) in acc.iter().enumerate() {
        let z = s.mean() / s.std_error();
        assert!(z.abs() <= 4.0, "increment mean {k}: z = {z}");
    }
}

#[test]
fn proxy_gradient_statistics() {
    // E tr ∇ũ(0) = 2 (centered perturbation), and the Frobenius norms of
    // ∇ũ(0) and F_L agree to the order of the neglected two-scale term.
    let n_real = 2_000;
    let eps = 0.3;
    let l_top = (2.0f64).exp();
    let vals: Vec<[f64; 3]> = indexed_map(n_real, |i| {
        let flow = run_flow(eps, l_top, 16, 880_000 + i as u64);
        let g = flow.proxy_gradient();
        [g.trace(), g.frobenius_sq(), flow.f_matrix.frobenius_sq()]
    });
    let tr = mc_mean(vals.iter().map(|v| v[0])).unwrap();
    let z = (tr.mean() - 2.0) / tr.std_error();
    assert!(z.abs() <= 4.0, "trace z = {z}");
    let grad = mc_mean(vals.iter().map(|v| v[1])).unwrap();
    let flow = mc_mean(vals.iter().map(|v| v[2])).unwrap();
    let ratio = grad.mean() / flow.mean();
    println!(
        "E|∇ũ(0)|² = {:.4}, E|F_L|² = {:.4}, ratio = {:.4}",
        grad.mean(),
        flow.mean(),
        ratio
    );
    assert!(
        (ratio - 1.0).abs() < 0.5,
        "gradient/flow norm ratio far from 1: {ratio}"
    );
}

#[test]
fn determinant_drift_is_small_diagnostic() {
    let field = sample_field(0.5, (1.0f64).exp(), SIDE, 512, 31).unwrap();
    let mut st = CorrectorState::new(&field);
    let grid = lnl_grid(std::f64::consts::E, 16);
    for l in grid[1..].iter() {
        st.advance(&field, l.exp()).unwrap();
    }
    let drift = st.det_drift().abs();
    println!("det drift after one e-fold: {drift:.3e}");
    assert!(drift < 0.5);
}

#[test]
fn empty_shells_reported_with_refine_signal() {
    let field: SpectralField = sample_field(0.5, 0.0, 16.0 * std::f64::consts::PI, 64, 3).unwrap();
    let mut st = CorrectorState::new(&field);
    st.advance(&field, 1.05).unwrap();
    let err = st.advance(&field, 1.05 * (1.0 + 1e-13)).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("refine"), "unexpected message: {msg}");
}
