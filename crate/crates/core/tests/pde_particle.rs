//! Cross-checks between the particle picture and the advection-diffusion
//! solver, plus the resolution and residual diagnostics.

use sl2drift::drift::*;
use sl2drift::field::{realize_field, sample_field};
use sl2drift::stats::*;

const SIDE: f64 = 64.0 * std::f64::consts::PI;

#[test]
fn pde_matches_particle_expectation() {
    // u(x,t) = x + φ(x,t) is the thermal mean of the particle position:
    // 10⁴ particles per start point at t = 4, within 3 SE plus a 2%
    // discretization budget.
    let eps = 0.3;
    let t_end = 4.0;
    let field = sample_field(eps, 0.0, SIDE, 256, 424_242).unwrap();
    let real = realize_field(&field).unwrap();
    let dx = real.dx;
    let starts = [
        [32.0 * dx, 32.0 * dx],
        [96.0 * dx, 64.0 * dx],
        [160.0 * dx, 192.0 * dx],
        [224.0 * dx, 128.0 * dx],
    ];
    let series = solve_phi_probes(&field, 0.005, &[t_end], &starts, PdeOptions::default()).unwrap();
    let n_thermal = 10_000;
    for (s_idx, &start) in starts.iter().enumerate() {
        let phi = series.values[0][s_idx];
        let mut acc = [RunningStats::new(), RunningStats::new()];
        let ends = indexed_map(n_thermal, |i| {
            particle_terminal(&real, start, t_end, 0.005, 90_000 + s_idx as u64, i as u64).unwrap()
        });
        for e in &ends {
            acc[0].push(e[0] - start[0]);
            acc[1].push(e[1] - start[1]);
        }
        for c in 0..2 {
            let tol = 3.0 * acc[c].std_error() + 0.02 * (1.0 + phi[c].abs());
            let diff = (acc[c].mean() - phi[c]).abs();
            assert!(
                diff <= tol,
                "start {s_idx} comp {c}: particle mean {} vs PDE {} (tol {tol})",
                acc[c].mean(),
                phi[c]
            );
        }
    }
}

#[test]
fn increment_statistic_is_resolution_robust() {
    let eps = 0.5;
    let t_end = 8.0;
    let mut values = Vec::new();
    for grid_n in [128usize, 256] {
        let field = sample_field(eps, 0.0, SIDE, grid_n, 77_001).unwrap();
        let x = [SIDE / 16.0, 0.0];
        let times = log_output_times(t_end, 64, 0.01);
        let series = solve_phi_probes(
            &field,
            0.01,
            &times,
            &[x, [0.0, 0.0]],
            PdeOptions::default(),
        )
        .unwrap();
        values.push(increment_statistic(&series, 0, 1));
    }
    let rel = (values[1] - values[0]).abs() / values[0];
    println!("increment statistic at N and 2N: {values:?} (rel diff {rel:.4})");
    assert!(rel < 0.05, "resolution sensitivity {rel}");
}

#[test]
fn displacement_enhancement_reported() {
    // Super-diffusivity diagnostic: E|X_t − X_0|²/(4t) at a desk-scale
    // horizon, reported against the slowly growing reference λ(t).
    let eps = 0.5;
    let t_end = 100.0;
    let field = sample_field(eps, 0.0, SIDE, 256, 10_101).unwrap();
    let real = realize_field(&field).unwrap();
    let start = [SIDE / 2.0, SIDE / 2.0];
    let n = 2_000;
    let vals: Vec<f64> = indexed_map(n, |i| {
        let end = particle_terminal(&real, start, t_end, 0.02, 333, i as u64).unwrap();
        let d = [end[0] - start[0], end[1] - start[1]];
        (d[0] * d[0] + d[1] * d[1]) / (4.0 * t_end)
    });
    let s = mc_mean(vals).unwrap();
    let lambda_ref = increment_reference(eps, 0.0, t_end);
    println!(
        "enhancement = {:.4} ± {:.4} (λ(T) reference {:.4})",
        s.mean(),
        s.std_error(),
        lambda_ref
    );
    assert!(
        s.mean() >= 1.0 - 3.0 * s.std_error(),
        "enhancement below the diffusive floor: {}",
        s.mean()
    );
}

#[test]
fn coupling_residual_diagnostic_runs() {
    let eps = 0.3;
    let t_end = 16.0;
    let x = [2.0 * SIDE / 256.0 * 4.0, 0.0];
    let n_real = 4;
    let vals: Vec<CouplingResidual> = indexed_map(n_real, |i| {
        let field = sample_field(eps, 0.0, SIDE, 256, 55_000 + i as u64).unwrap();
        theorem1_residual(&field, x, t_end, 0.01, 16).unwrap()
    });
    let mean_res = vals.iter().map(|v| v.residual).sum::<f64>() / n_real as f64;
    let mean_f = vals.iter().map(|v| v.f_norm_sq).sum::<f64>() / n_real as f64;
    let constant = mean_res / (eps * eps * mean_f);
    println!(
        "coupling residual: mean {mean_res:.4}, E|F|² {mean_f:.4}, observed constant {constant:.4}"
    );
    assert!(vals
        .iter()
        .all(|v| v.residual.is_finite() && v.residual >= 0.0));
    // Intermittency diagnostic on the same ensemble.
    let stats: Vec<f64> = vals.iter().map(|v| v.increment_stat).collect();
    for p in [1.0, 2.0] {
        let moment = intermittency_moment(&stats, p);
        let reference = intermittency_reference(eps, 2.0, t_end, p);
        println!("p = {p}: moment {moment:.4}, reference shape {reference:.4}");
        assert!(moment.is_finite() && moment > 0.0);
    }
}
