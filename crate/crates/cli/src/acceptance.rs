//! The acceptance suite: every gating criterion as a function returning a
//! pass flag plus the individual gated quantities, shared by the `accept`
//! subcommand and the `acceptance` integration test target.

use std::path::{Path, PathBuf};

use sl2drift::corrector::{lnl_grid, shell_bins, GradientFlow, ScaleMap};
use sl2drift::drift::{
    increment_reference, intermittency_moment, intermittency_reference, particle_terminal,
    solve_phi_probes, theorem1_residual, PdeOptions,
};
use sl2drift::field::{
    check_postulates, circle_tensor, coupled_b_path, coupling_covariance_lattice, realize_field,
    sample_field,
};
use sl2drift::rng::{seed_stream, standard_normal};
use sl2drift::scalar::{
    comparison_triple_violations, gbm_exact, gbm_moment, gbm_moment_quadrature,
    mass_concentration_quadrature, r_terminal,
};
use sl2drift::sl2::{check_trace_identity, frobenius_r, CovarianceSpec, Mat2, Sl2Walker};
use sl2drift::stats::{
    correlation_z, indexed_map, ks_two_sample, mc_mean, ratio_with_se, run_with_workers,
    MomentReport, RunningStats,
};

use crate::commands::matrix_r_sweep;
use crate::config::AcceptConfig;
use crate::RunError;

const E: f64 = std::f64::consts::E;
const SWEEP_TAUS: [f64; 3] = [0.5, 1.0, 2.0];

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub reports: Vec<MomentReport>,
}

impl CriterionResult {
    fn from_reports(id: usize, name: &'static str, reports: Vec<MomentReport>) -> Self {
        let pass = reports.iter().all(|r| r.pass);
        Self {
            id,
            name,
            pass,
            reports,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:02} {:<28} {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// The matrix-path ensembles shared by criteria 1, 2, 3, 5 and 7:
/// terminal `R` samples at τ = 0.5, 1, 2 for the nominal and the halved
/// step size.
pub struct SharedSweeps {
    pub coarse: Vec<Vec<f64>>,
    pub fine: Vec<Vec<f64>>,
}

pub fn shared_sweeps(cfg: &AcceptConfig) -> Result<SharedSweeps, RunError> {
    let coarse = matrix_r_sweep(
        &SWEEP_TAUS,
        1e-3,
        cfg.n_matrix_paths,
        cfg.master_seed ^ 0x01,
        cfg.workers,
    )?;
    let fine = matrix_r_sweep(
        &SWEEP_TAUS,
        5e-4,
        cfg.n_matrix_paths,
        cfg.master_seed ^ 0x02,
        cfg.workers,
    )?;
    Ok(SharedSweeps { coarse, fine })
}

/// Criterion 1: determinant preservation along one path to τ = 2.
pub fn criterion_01(cfg: &AcceptConfig) -> Result<CriterionResult, RunError> {
    let cov = CovarianceSpec::canonical();
    let mut walker = Sl2Walker::new(1e-3, &cov, cfg.master_seed ^ 0x11, 0, 0)?;
    let mut max_det = 0.0f64;
    let mut min_r = f64::INFINITY;
    for _ in 0..2000 {
        walker.step()?;
        max_det = max_det.max((walker.state().det() - 1.0).abs());
        min_r = min_r.min(frobenius_r(walker.state()));
    }
    let reports = vec![
        MomentReport::residual("c01_max_abs_det_minus_1", max_det, 1e-12, "deterministic"),
        MomentReport::gate("c01_min_frobenius_R", min_r, min_r >= 1.0, "deterministic"),
    ];
    Ok(CriterionResult::from_reports(
        1,
        "determinant preservation",
        reports,
    ))
}

/// Criterion 2: E|F_τ|² = 2e^τ at τ ∈ {0.5, 1, 2} within 3 SE and 2%
/// relative bias, with the bias not growing under dt → dt/2.
pub fn criterion_02(sweeps: &SharedSweeps) -> Result<CriterionResult, RunError> {
    let mut reports = Vec::new();
    for (slot, tau) in SWEEP_TAUS.iter().enumerate() {
        let reference = 2.0 * tau.exp();
        let coarse =
            mc_mean(sweeps.coarse[slot].iter().map(|r| 2.0 * r)).map_err(RunError::from)?;
        let fine = mc_mean(sweeps.fine[slot].iter().map(|r| 2.0 * r)).map_err(RunError::from)?;
        reports.push(MomentReport::gated(
            format!("c02_norm_tau{tau}"),
            &coarse,
            reference,
            3.0,
            "closed-form",
        ));
        let rel_coarse = (coarse.mean() - reference).abs() / reference;
        reports.push(MomentReport::gate(
            format!("c02_rel_bias_tau{tau}"),
            rel_coarse,
            rel_coarse <= 0.02,
            "closed-form",
        ));
        // One-sided refinement gate: the halved step must not be worse
        // beyond joint noise.
        let rel_fine = (fine.mean() - reference).abs() / reference;
        let joint_se = (coarse.std_error().powi(2) + fine.std_error().powi(2)).sqrt() / reference;
        reports.push(MomentReport::gate(
            format!("c02_bias_shrinks_tau{tau}"),
            rel_fine - rel_coarse,
            rel_fine <= rel_coarse + 3.0 * joint_se,
            "closed-form",
        ));
    }
    Ok(CriterionResult::from_reports(
        2,
        "Frobenius normalization",
        reports,
    ))
}

/// Criterion 3: E R²_τ = (2e^{3τ}+1)/3 at τ = 1.
pub fn criterion_03(sweeps: &SharedSweeps) -> Result<CriterionResult, RunError> {
    // Independent oracle: integrate y' = 3y − 1 with RK4.
    let mut y = 1.0f64;
    let steps = 100_000;
    let h = 1.0 / steps as f64;
    for _ in 0..steps {
        let f = |y: f64| 3.0 * y - 1.0;
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    let closed = (2.0 * (3.0f64).exp() + 1.0) / 3.0;
    let mut reports = vec![MomentReport::residual(
        "c03_ode_oracle_vs_closed_form",
        (y - closed) / closed,
        1e-9,
        "quadrature",
    )];
    let stats = mc_mean(sweeps.coarse[1].iter().map(|r| r * r)).map_err(RunError::from)?;
    reports.push(MomentReport::gated(
        "c03_r_second_moment_tau1",
        &stats,
        closed,
        3.0,
        "closed-form",
    ));
    Ok(CriterionResult::from_reports(
        3,
        "second moment of R",
        reports,
    ))
}

/// Criterion 4: trace identity residual on 10⁴ random symmetric matrices.
pub fn criterion_04(cfg: &AcceptConfig) -> Result<CriterionResult, RunError> {
    let mut rng = seed_stream(cfg.master_seed ^ 0x44, 0);
    let mut worst = 0.0f64;
    for k in 0..10_000 {
        let scale = if k % 2 == 0 { 1.0 } else { 5.0 };
        let a = scale * standard_normal(&mut rng);
        let b = scale * standard_normal(&mut rng);
        let c = scale * standard_normal(&mut rng);
        let g = Mat2([a, b, b, c]);
        let r = check_trace_identity(&g).map_err(RunError::from)?;
        worst = worst.max(r.abs());
    }
    let reports = vec![MomentReport::residual(
        "c04_trace_identity_max_residual",
        worst,
        1e-12,
        "deterministic",
    )];
    Ok(CriterionResult::from_reports(4, "trace identity", reports))
}

/// Criterion 5: two-sample KS between the scalar and the matrix R at τ=1.
pub fn criterion_05(
    cfg: &AcceptConfig,
    sweeps: &SharedSweeps,
) -> Result<CriterionResult, RunError> {
    let n = cfg.n_ks.min(sweeps.coarse[1].len());
    let matrix = &sweeps.coarse[1][..n];
    let scalar: Vec<f64> = run_with_workers(cfg.workers, || {
        indexed_map(n, |i| {
            r_terminal(1.0, 1e-3, cfg.master_seed ^ 0x55, i as u64).map(|(r, _)| r)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
    })
    .map_err(RunError::from)?;
    let (d, p) = ks_two_sample(matrix, &scalar);
    let reports = vec![
        MomentReport::gate("c05_ks_p_value", p, p > 0.01, "oracle-mc"),
        MomentReport::diagnostic("c05_ks_statistic", d),
    ];
    Ok(CriterionResult::from_reports(
        5,
        "law equivalence of R",
        reports,
    ))
}

/// Criterion 6: lognormal moments by quadrature and Monte Carlo, and the
/// moment domination E R^p ≤ E S^p.
pub fn criterion_06(cfg: &AcceptConfig) -> Result<CriterionResult, RunError> {
    let mut reports = Vec::new();
    for p in [1.0, 2.0, 3.0] {
        for tau in [0.5, 1.0] {
            let (value, _) = gbm_moment_quadrature(p, tau, 1e-12).map_err(RunError::from)?;
            let reference = gbm_moment(p, tau);
            reports.push(MomentReport::residual(
                format!("c06_quadrature_p{p}_tau{tau}"),
                (value - reference) / reference,
                1e-10,
                "quadrature",
            ));
        }
    }
    // Monte Carlo second moment at τ = 1 over exact draws.
    let n = cfg.n_exact_draws;
    let seed = cfg.master_seed ^ 0x66;
    let stats = run_with_workers(cfg.workers, || {
        mc_mean(
            indexed_map(n, |i| {
                let mut rng = seed_stream(seed, i as u64);
                let s = gbm_exact(1.0, standard_normal(&mut rng));
                s * s
            })
            .into_iter(),
        )
        .unwrap()
    });
    reports.push(MomentReport::gated(
        "c06_mc_second_moment_tau1",
        &stats,
        gbm_moment(2.0, 1.0),
        3.0,
        "closed-form",
    ));
    // Matched-sample domination at τ = 1 for p = 2, 3 (one-sided).
    let n = cfg.n_domination;
    let seed = cfg.master_seed ^ 0x67;
    let pairs: Vec<[f64; 2]> = run_with_workers(cfg.workers, || {
        indexed_map(n, |i| {
            r_terminal(1.0, 1e-3, seed, i as u64).map(|(r, w)| [r, gbm_exact(1.0, w)])
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
    })
    .map_err(RunError::from)?;
    for p in [2i32, 3] {
        let diff =
            mc_mean(pairs.iter().map(|v| v[0].powi(p) - v[1].powi(p))).map_err(RunError::from)?;
        reports.push(MomentReport::gate(
            format!("c06_domination_p{p}"),
            diff.mean(),
            diff.mean() <= 3.0 * diff.std_error(),
            "closed-form",
        ));
    }
    Ok(CriterionResult::from_reports(
        6,
        "lognormal moments",
        reports,
    ))
}

/// Criterion 7: mass concentration of S (quadrature + MC) and of the
/// matrix R at τ = 2.
pub fn criterion_07(
    cfg: &AcceptConfig,
    sweeps: &SharedSweeps,
) -> Result<CriterionResult, RunError> {
    let mut reports = Vec::new();
    for tau in [1.0, 4.0] {
        let v = mass_concentration_quadrature(tau).map_err(RunError::from)?;
        reports.push(MomentReport::residual(
            format!("c07_quadrature_tau{tau}"),
            v - 0.5,
            1e-10,
            "quadrature",
        ));
    }
    let n = cfg.n_exact_draws;
    let seed = cfg.master_seed ^ 0x77;
    let tau = 1.0f64;
    let thr = (1.5 * tau).exp();
    let samples: Vec<f64> = run_with_workers(cfg.workers, || {
        indexed_map(n, |i| {
            let mut rng = seed_stream(seed, i as u64);
            gbm_exact(tau, tau.sqrt() * standard_normal(&mut rng))
        })
    });
    let numers: Vec<f64> = samples
        .iter()
        .map(|&s| if s >= thr { s } else { 0.0 })
        .collect();
    let (ratio, se) = ratio_with_se(&numers, &samples);
    let z = (ratio - 0.5) / se;
    reports.push(MomentReport::gate(
        "c07_mc_ratio_tau1",
        ratio,
        z.abs() <= 3.0,
        "quadrature",
    ));
    // Matrix-R counterpart at τ = 2 from the shared sweep: the high
    // super-level set above ½(E R)^{3/2} keeps at least a quarter of the
    // mass (one-sided, 3 SE slack).
    let r2 = &sweeps.coarse[2];
    let mean = r2.iter().sum::<f64>() / r2.len() as f64;
    let threshold = 0.5 * mean.powf(1.5);
    let numers: Vec<f64> = r2
        .iter()
        .map(|&r| if r >= threshold { r } else { 0.0 })
        .collect();
    let (ratio, se) = ratio_with_se(&numers, r2);
    reports.push(MomentReport::gate(
        "c07_matrix_ratio_tau2",
        ratio,
        ratio >= 0.25 - 3.0 * se,
        "closed-form",
    ));
    Ok(CriterionResult::from_reports(
        7,
        "mass concentration",
        reports,
    ))
}

/// Criterion 8: pathwise comparisons over coupled triples and strict
/// positivity of the transformed process.
pub fn criterion_08(cfg: &AcceptConfig) -> Result<CriterionResult, RunError> {
    let n = cfg.n_triples;
    let seed = cfg.master_seed ^ 0x88;
    let counts: Vec<[usize; 4]> = run_with_workers(cfg.workers, || {
        indexed_map(n, |i| {
            comparison_triple_violations(2.0, 1e-4, 10.0, seed, i as u64).map(|v| {
                [
                    v.log_vs_bessel,
                    v.tilde_vs_gbm,
                    v.r_vs_gbm,
                    v.boundary_contacts,
                ]
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
    })
    .map_err(RunError::from)?;
    let total = counts.iter().fold([0usize; 4], |mut acc, c| {
        for k in 0..4 {
            acc[k] += c[k];
        }
        acc
    });
    let names = [
        "c08_violations_log_vs_bessel",
        "c08_violations_tilde_vs_gbm",
        "c08_violations_2r_vs_gbm",
        "c08_boundary_contacts",
    ];
    let reports = names
        .iter()
        .zip(total)
        .map(|(name, count)| MomentReport::gate(*name, count as f64, count == 0, "deterministic"))
        .collect();
    Ok(CriterionResult::from_reports(
        8,
        "pathwise comparisons",
        reports,
    ))
}

/// Criterion 9: coupling covariance, disjoint-scale independence, and the
/// covariance postulates.
pub fn criterion_09(cfg: &AcceptConfig) -> Result<CriterionResult, RunError> {
    let side = 128.0 * std::f64::consts::PI;
    let grid_n = 512;
    let epsilon = 0.5;
    let l_top = (2.0f64).exp();
    let lnl = [0.0, 1.0, 2.0];
    let n = cfg.n_coupling;
    let seed = cfg.master_seed ^ 0x99;
    // Per realization: B at L = e and the two unit increments.
    let rows: Vec<[f64; 9]> = run_with_workers(cfg.workers, || {
        indexed_map(n, |i| {
            let f = sample_field(epsilon, l_top, side, grid_n, seed.wrapping_add(i as u64))?;
            let path = coupled_b_path(&f, &lnl)?;
            let b = path.values[1];
            let inc = path.increments();
            Ok::<_, sl2drift::CoreError>([
                b.a1, b.a2, b.a3, inc[0].a1, inc[0].a2, inc[0].a3, inc[1].a1, inc[1].a2, inc[1].a3,
            ])
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
    })
    .map_err(RunError::from)?;
    let lattice = coupling_covariance_lattice(side, (-1.0f64).exp(), 1.0);
    let continuum = [[0.25, 0.0, 0.0], [0.0, 0.25, 0.0], [0.0, 0.0, 0.5]];
    let mut reports = Vec::new();
    let entries = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    for (a, b) in entries {
        let stats = mc_mean(rows.iter().map(|r| r[a] * r[b])).map_err(RunError::from)?;
        reports.push(MomentReport::gated(
            format!("c09_cov_a{}a{}_vs_lattice", a + 1, b + 1),
            &stats,
            lattice[a][b],
            4.0,
            "deterministic",
        ));
        reports.push(MomentReport::gated(
            format!("c09_cov_a{}a{}_vs_continuum", a + 1, b + 1),
            &stats,
            continuum[a][b],
            4.0,
            "quadrature",
        ));
    }
    // Disjoint-scale increments: all 9 cross correlations.
    let mut max_z = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            let first: Vec<f64> = rows.iter().map(|r| r[3 + a]).collect();
            let second: Vec<f64> = rows.iter().map(|r| r[6 + b]).collect();
            max_z = max_z.max(correlation_z(&first, &second).abs());
        }
    }
    reports.push(MomentReport::gate(
        "c09_disjoint_increment_max_corr_z",
        max_z,
        max_z <= 4.0,
        "deterministic",
    ));
    // Covariance postulates for the canonical and the circle-quadrature
    // measures.
    let canonical = CovarianceSpec::canonical().rank_one_measure();
    let (r1, r2) = check_postulates(&canonical);
    reports.push(MomentReport::residual(
        "c09_postulate1_canonical",
        r1,
        1e-12,
        "deterministic",
    ));
    reports.push(MomentReport::residual(
        "c09_postulate2_canonical",
        r2,
        1e-12,
        "deterministic",
    ));
    let ct = circle_tensor();
    let (r1, r2) = check_postulates(&ct.measure);
    reports.push(MomentReport::residual(
        "c09_postulate1_circle",
        r1,
        1e-12,
        "quadrature",
    ));
    reports.push(MomentReport::residual(
        "c09_postulate2_circle",
        r2,
        1e-12,
        "quadrature",
    ));
    // The circle quadrature itself reproduces the canonical coefficients.
    let mut worst = 0.0f64;
    for (i, row) in ct.coeff_cov.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((v - continuum[i][j]).abs());
        }
    }
    reports.push(MomentReport::residual(
        "c09_circle_tensor_vs_canonical",
        worst,
        1e-12,
        "quadrature",
    ));
    Ok(CriterionResult::from_reports(
        9,
        "coupling covariance",
        reports,
    ))
}

/// Criterion 10: the law identification E|F_L|² = 2λ(L²−1) of the
/// scale-by-scale gradient recursion.
pub fn criterion_10(cfg: &AcceptConfig) -> Result<CriterionResult, RunError> {
    let side = 256.0 * std::f64::consts::PI;
    let grid_n = 512;
    let epsilon = 0.5;
    let l_top = (2.0f64).exp();
    let grid = lnl_grid(l_top, 32);
    let n = cfg.n_corrector;
    let seed = cfg.master_seed ^ 0xaa;
    let vals: Vec<[f64; 2]> = run_with_workers(cfg.workers, || {
        indexed_map(n, |i| {
            let f = sample_field(epsilon, l_top, side, grid_n, seed.wrapping_add(i as u64))?;
            let bins = shell_bins(&f, &grid)?;
            let mut flow = GradientFlow::new(epsilon);
            let mut at_e = 0.0;
            for (j, bin) in bins.iter().enumerate() {
                if bin.is_empty() {
                    return Err(sl2drift::CoreError::EmptyShell {
                        l_left: grid[j].exp(),
                        l_right: grid[j + 1].exp(),
                    });
                }
                flow.advance(&f, bin, grid[j + 1].exp());
                if (grid[j + 1] - 1.0).abs() < 1e-12 {
                    at_e = flow.f_matrix.frobenius_sq();
                }
            }
            Ok([at_e, flow.f_matrix.frobenius_sq()])
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
    })
    .map_err(RunError::from)?;
    let sm = ScaleMap::new(epsilon);
    let mut reports = Vec::new();
    for (slot, l) in [(0usize, E), (1, l_top)] {
        let stats = mc_mean(vals.iter().map(|v| v[slot])).map_err(RunError::from)?;
        let reference = 2.0 * sm.lambda_of(l * l - 1.0);
        let rel = (stats.mean() - reference) / reference;
        reports.push(MomentReport::gate(
            format!("c10_f_norm_rel_err_L{:.3}", l),
            rel,
            rel.abs() <= 0.05,
            "closed-form",
        ));
        reports.push(MomentReport::gated(
            format!("c10_f_norm_L{:.3}", l),
            &stats,
            reference,
            4.0,
            "closed-form",
        ));
    }
    Ok(CriterionResult::from_reports(
        10,
        "corrector law identification",
        reports,
    ))
}

/// Criterion 11: the solver's φ is the thermal mean of the particle
/// displacement.
pub fn criterion_11(cfg: &AcceptConfig) -> Result<CriterionResult, RunError> {
    let side = 64.0 * std::f64::consts::PI;
    let grid_n = 256;
    let epsilon = 0.3;
    let t_end = 10.0;
    let dt = 0.01;
    let seed = cfg.master_seed ^ 0xbb;
    let field = sample_field(epsilon, 0.0, side, grid_n, seed).map_err(RunError::from)?;
    let real = realize_field(&field).map_err(RunError::from)?;
    let dx = real.dx;
    let starts = [
        [32.0 * dx, 32.0 * dx],
        [96.0 * dx, 64.0 * dx],
        [160.0 * dx, 192.0 * dx],
        [224.0 * dx, 128.0 * dx],
    ];
    let series = solve_phi_probes(&field, dt, &[t_end], &starts, PdeOptions::default())
        .map_err(RunError::from)?;
    let n = cfg.n_thermal;
    let mut reports = Vec::new();
    for (s_idx, &start) in starts.iter().enumerate() {
        let phi = series.values[0][s_idx];
        let ends: Vec<[f64; 2]> = run_with_workers(cfg.workers, || {
            indexed_map(n, |i| {
                particle_terminal(&real, start, t_end, dt, seed ^ (s_idx as u64 + 1), i as u64)
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
        })
        .map_err(RunError::from)?;
        let mut pass = true;
        let mut worst = 0.0f64;
        for c in 0..2 {
            let mut acc = RunningStats::new();
            for e in &ends {
                acc.push(e[c] - start[c]);
            }
            let tol = 3.0 * acc.std_error() + 0.02 * (1.0 + phi[c].abs());
            let miss = (acc.mean() - phi[c]).abs();
            worst = worst.max(miss / tol);
            pass &= miss <= tol;
        }
        reports.push(MomentReport::gate(
            format!("c11_duality_start{s_idx}"),
            worst,
            pass,
            "oracle-mc",
        ));
    }
    Ok(CriterionResult::from_reports(
        11,
        "PDE-particle duality",
        reports,
    ))
}

/// Criterion 12: the asymptotic statements are replaced by non-gating
/// diagnostics whose reports must be produced.
pub fn criterion_12(cfg: &AcceptConfig) -> Result<CriterionResult, RunError> {
    let side = 64.0 * std::f64::consts::PI;
    let grid_n = 128;
    let epsilon = 0.3;
    let t_end = 64.0;
    let dt = 0.04;
    let x = [std::f64::consts::PI, 0.0];
    let x_norm = std::f64::consts::PI;
    let n = cfg.n_diagnostic_realizations;
    let seed = cfg.master_seed ^ 0xcc;
    let rows: Vec<(f64, f64, f64)> = run_with_workers(cfg.workers, || {
        indexed_map(n, |i| {
            let f = sample_field(epsilon, 0.0, side, grid_n, seed.wrapping_add(i as u64))?;
            let out = theorem1_residual(&f, x, t_end, dt, 16)?;
            Ok::<_, sl2drift::CoreError>((out.residual, out.increment_stat, out.f_norm_sq))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
    })
    .map_err(RunError::from)?;
    let mean =
        |f: &dyn Fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    let residual = mean(&|r| r.0);
    let f_norm = mean(&|r| r.2);
    let stats: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let incr_mean = mean(&|r| r.1);
    let reports = vec![
        MomentReport::diagnostic("c12_coupling_residual_mean", residual),
        MomentReport::diagnostic(
            "c12_coupling_residual_constant",
            residual / (epsilon * epsilon * f_norm),
        ),
        MomentReport::diagnostic("c12_increment_stat_mean", incr_mean),
        MomentReport::diagnostic(
            "c12_increment_reference",
            increment_reference(epsilon, x_norm, t_end),
        ),
        MomentReport::diagnostic(
            "c12_intermittency_p2_moment",
            intermittency_moment(&stats, 2.0),
        ),
        MomentReport::diagnostic(
            "c12_intermittency_p2_reference",
            intermittency_reference(epsilon, x_norm, t_end, 2.0),
        ),
    ];
    Ok(CriterionResult::from_reports(
        12,
        "asymptotic diagnostics",
        reports,
    ))
}

/// Run all criteria in order. The slow shared sweeps are computed once.
pub fn run_all(cfg: &AcceptConfig) -> Result<Vec<CriterionResult>, RunError> {
    let sweeps = shared_sweeps(cfg)?;
    Ok(vec![
        criterion_01(cfg)?,
        criterion_02(&sweeps)?,
        criterion_03(&sweeps)?,
        criterion_04(cfg)?,
        criterion_05(cfg, &sweeps)?,
        criterion_06(cfg)?,
        criterion_07(cfg, &sweeps)?,
        criterion_08(cfg)?,
        criterion_09(cfg)?,
        criterion_10(cfg)?,
        criterion_11(cfg)?,
        criterion_12(cfg)?,
    ])
}

/// Write the machine-readable report (one JSON array of every gated
/// quantity) and return its path.
pub fn write_report(results: &[CriterionResult], out_dir: &Path) -> Result<PathBuf, RunError> {
    let all: Vec<&MomentReport> = results.iter().flat_map(|r| r.reports.iter()).collect();
    let path = out_dir.join("acceptance_report.json");
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(&path, serde_json::to_string_pretty(&all).unwrap())?;
    Ok(path)
}
