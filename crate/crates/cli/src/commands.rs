//! Subcommand implementations. Every command returns its primary output
//! as a string (CSV or a spectral dump) so callers can write it to the
//! output directory and tests can compare runs byte for byte.

use std::fmt::Write as _;

use sl2drift::corrector::{lnl_grid, shell_bins, GradientFlow, ScaleMap};
use sl2drift::drift::{increment_reference, increment_statistic};
use sl2drift::drift::{log_output_times, solve_phi_probes, theorem1_residual, PdeOptions};
use sl2drift::field::{
    coupled_b_path, coupling_covariance_lattice, mode_spacing, sample_field, Mode, SpectralField,
};
use sl2drift::rng::{seed_stream, standard_normal};
use sl2drift::scalar::{bessel2d_terminal, gbm_exact, r_terminal};
use sl2drift::sl2::{frobenius_r, CovarianceSpec, Sl2Walker};
use sl2drift::stats::{indexed_map, mc_mean, run_with_workers, RunningStats};

use crate::config::*;
use crate::RunError;

/// Terminal values of `R = |F|²/2` for every path at each checkpoint time
/// (checkpoints must be increasing). Deterministic for any worker count.
pub fn matrix_r_sweep(
    taus: &[f64],
    dt: f64,
    n_paths: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<Vec<f64>>, RunError> {
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RunError::Config("taus must be increasing".into()));
    }
    let cov = CovarianceSpec::canonical();
    let cells: Vec<u64> = taus.iter().map(|t| (t / dt).round() as u64).collect();
    let rows: Vec<Vec<f64>> = run_with_workers(workers, || {
        indexed_map(n_paths, |i| {
            let mut w = Sl2Walker::new(dt, &cov, master_seed, i as u64, 0)?;
            let mut out = Vec::with_capacity(cells.len());
            for &c in &cells {
                w.advance_to_cell(c)?;
                out.push(frobenius_r(w.state()));
            }
            Ok::<_, sl2drift::CoreError>(out)
        })
        .into_iter()
        .collect::<Result<_, _>>()
    })?;
    let mut per_tau = vec![Vec::with_capacity(n_paths); taus.len()];
    for row in rows {
        for (slot, v) in row.into_iter().enumerate() {
            per_tau[slot].push(v);
        }
    }
    Ok(per_tau)
}

pub fn sl2_sim(cfg: &Sl2SimConfig) -> Result<String, RunError> {
    let per_tau = matrix_r_sweep(&cfg.taus, cfg.dt, cfg.n_paths, cfg.master_seed, cfg.workers)?;
    let mut csv = String::from("tau,mean_R,se_R,mean_F2,se_F2,ref_2exp_tau,z\n");
    for (tau, samples) in cfg.taus.iter().zip(&per_tau) {
        let r = mc_mean(samples.iter().copied()).map_err(RunError::from_core)?;
        let f2 = mc_mean(samples.iter().map(|v| 2.0 * v)).map_err(RunError::from_core)?;
        let reference = 2.0 * tau.exp();
        let z = (f2.mean() - reference) / f2.std_error();
        writeln!(
            csv,
            "{tau},{},{},{},{},{reference},{z}",
            r.mean(),
            r.std_error(),
            f2.mean(),
            f2.std_error()
        )
        .unwrap();
    }
    Ok(csv)
}

pub fn scalar_sim(cfg: &ScalarSimConfig) -> Result<String, RunError> {
    let mut csv = String::from("process,tau,mean,se,reference,z\n");
    let n = cfg.n_paths;
    for &tau in &cfg.taus {
        let (r_stats, r2_stats) = run_with_workers(cfg.workers, || {
            let vals: Result<Vec<f64>, _> = indexed_map(n, |i| {
                r_terminal(tau, cfg.dt, cfg.master_seed, i as u64).map(|(r, _)| r)
            })
            .into_iter()
            .collect();
            vals.map(|v| {
                (
                    mc_mean(v.iter().copied()).unwrap(),
                    mc_mean(v.iter().map(|r| r * r)).unwrap(),
                )
            })
        })?;
        let s_stats = run_with_workers(cfg.workers, || {
            mc_mean(
                indexed_map(n, |i| {
                    let mut rng = seed_stream(cfg.master_seed ^ 0xa5a5, i as u64);
                    gbm_exact(tau, tau.sqrt() * standard_normal(&mut rng))
                })
                .into_iter(),
            )
            .unwrap()
        });
        let x2_stats = run_with_workers(cfg.workers, || {
            let vals: Result<Vec<f64>, _> = indexed_map(n, |i| {
                bessel2d_terminal(tau, cfg.dt, cfg.master_seed ^ 0x5a5a, i as u64)
            })
            .into_iter()
            .collect();
            vals.map(|v| mc_mean(v.iter().map(|x| x * x)).unwrap())
        })?;
        let rows: [(&str, &RunningStats, f64); 4] = [
            ("R_mean", &r_stats, tau.exp()),
            (
                "R_second_moment",
                &r2_stats,
                (2.0 * (3.0 * tau).exp() + 1.0) / 3.0,
            ),
            ("S_mean", &s_stats, tau.exp()),
            ("X_square", &x2_stats, 2.0 * tau),
        ];
        for (name, stats, reference) in rows {
            let z = (stats.mean() - reference) / stats.std_error();
            writeln!(
                csv,
                "{name},{tau},{},{},{reference},{z}",
                stats.mean(),
                stats.std_error()
            )
            .unwrap();
        }
    }
    Ok(csv)
}

/// Textual spectral dump: a parameter header and one record per retained
/// half-space mode with both complex velocity components.
pub fn field_dump(field: &SpectralField) -> String {
    let dk = mode_spacing(field.torus_side);
    let mut out = String::from("# sl2drift spectral field dump v1\n");
    writeln!(
        out,
        "# torus_side={} grid_n={} epsilon={} inner_cutoff={} outer_cutoff={} seed={}",
        field.torus_side,
        field.grid_n,
        field.epsilon,
        field.inner_cutoff,
        field.outer_cutoff,
        field.seed
    )
    .unwrap();
    out.push_str("n1,n2,re1,im1,re2,im2\n");
    for m in &field.modes {
        let c = m.coeffs(dk);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            m.n1, m.n2, c[0].re, c[0].im, c[1].re, c[1].im
        )
        .unwrap();
    }
    out
}

/// Parse a spectral dump back into a field realization.
pub fn read_field_dump(text: &str) -> Result<SpectralField, RunError> {
    let mut lines = text.lines();
    let magic = lines
        .next()
        .ok_or_else(|| RunError::Config("empty dump".into()))?;
    if !magic.starts_with("# sl2drift spectral field dump") {
        return Err(RunError::Config("not a spectral field dump".into()));
    }
    let header = lines
        .next()
        .ok_or_else(|| RunError::Config("missing dump header".into()))?;
    let mut kv = std::collections::HashMap::new();
    for part in header.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = part.split_once('=') {
            kv.insert(k.to_string(), v.to_string());
        }
    }
    let get = |k: &str| -> Result<f64, RunError> {
        kv.get(k)
            .ok_or_else(|| RunError::Config(format!("dump header missing {k}")))?
            .parse()
            .map_err(|e| RunError::Config(format!("bad {k}: {e}")))
    };
    let torus_side = get("torus_side")?;
    let dk = mode_spacing(torus_side);
    let mut modes = Vec::new();
    for line in lines.skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(RunError::Config(format!("bad dump record: {line}")));
        }
        let n1: i32 = f[0].parse().map_err(|e| RunError::Config(format!("{e}")))?;
        let n2: i32 = f[1].parse().map_err(|e| RunError::Config(format!("{e}")))?;
        let c1 = num_parse(f[2], f[3])?;
        let c2 = num_parse(f[4], f[5])?;
        // Recover the scalar amplitude from the larger k⊥ component.
        let amp = if n1.abs() >= n2.abs() {
            c2 / (n1 as f64 * dk)
        } else {
            c1 / (-(n2 as f64) * dk)
        };
        modes.push(Mode { n1, n2, amp });
    }
    Ok(SpectralField {
        torus_side,
        grid_n: get("grid_n")? as usize,
        epsilon: get("epsilon")?,
        inner_cutoff: get("inner_cutoff")?,
        outer_cutoff: get("outer_cutoff")?,
        seed: get("seed")? as u64,
        modes,
    })
}

fn num_parse(re: &str, im: &str) -> Result<sl2drift::field::Complex64, RunError> {
    Ok(sl2drift::field::Complex64::new(
        re.parse()
            .map_err(|e| RunError::Config(format!("bad float: {e}")))?,
        im.parse()
            .map_err(|e| RunError::Config(format!("bad float: {e}")))?,
    ))
}

pub fn field_sample(cfg: &FieldSampleConfig) -> Result<String, RunError> {
    let field = sample_field(
        cfg.epsilon,
        cfg.l_cut,
        cfg.torus_side,
        cfg.grid_n,
        cfg.master_seed,
    )?;
    Ok(field_dump(&field))
}

pub fn couple_check(cfg: &CoupleCheckConfig) -> Result<String, RunError> {
    let l_top = std::f64::consts::E;
    let lnl = [0.0, 1.0];
    let samples: Vec<[f64; 6]> = run_with_workers(cfg.workers, || {
        indexed_map(cfg.n_realizations, |i| {
            let f = sample_field(
                cfg.epsilon,
                l_top,
                cfg.torus_side,
                cfg.grid_n,
                cfg.master_seed.wrapping_add(i as u64),
            )?;
            let b = coupled_b_path(&f, &lnl)?.values[1];
            Ok::<_, sl2drift::CoreError>([
                b.a1 * b.a1,
                b.a2 * b.a2,
                b.a3 * b.a3,
                b.a1 * b.a2,
                b.a1 * b.a3,
                b.a2 * b.a3,
            ])
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
    })?;
    let lattice = coupling_covariance_lattice(cfg.torus_side, (-1.0f64).exp(), 1.0);
    let continuum = [[0.25, 0.0, 0.0], [0.0, 0.25, 0.0], [0.0, 0.0, 0.5]];
    let names = ["a1a1", "a2a2", "a3a3", "a1a2", "a1a3", "a2a3"];
    let index = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    let mut csv = String::from("entry,empirical,se,lattice_ref,continuum_ref,z_lattice\n");
    for (slot, name) in names.iter().enumerate() {
        let s = mc_mean(samples.iter().map(|v| v[slot])).map_err(RunError::from_core)?;
        let (a, b) = index[slot];
        let z = (s.mean() - lattice[a][b]) / s.std_error();
        writeln!(
            csv,
            "{name},{},{},{},{},{z}",
            s.mean(),
            s.std_error(),
            lattice[a][b],
            continuum[a][b]
        )
        .unwrap();
    }
    Ok(csv)
}

pub fn corrector_run(cfg: &CorrectorRunConfig) -> Result<String, RunError> {
    let grid = lnl_grid(cfg.l_max, cfg.shells_per_efold);
    // Checkpoints at whole e-folds.
    let checkpoints: Vec<usize> = grid
        .iter()
        .enumerate()
        .filter(|(j, l)| *j > 0 && (*l - l.round()).abs() < 1e-9 && l.round() >= 1.0)
        .map(|(j, _)| j)
        .collect();
    let sm = ScaleMap::new(cfg.epsilon);
    let samples: Vec<Vec<f64>> = run_with_workers(cfg.workers, || {
        indexed_map(cfg.n_realizations, |i| {
            let f = sample_field(
                cfg.epsilon,
                cfg.l_max,
                cfg.torus_side,
                cfg.grid_n,
                cfg.master_seed.wrapping_add(i as u64),
            )?;
            let bins = shell_bins(&f, &grid)?;
            let mut flow = GradientFlow::new(cfg.epsilon);
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut next = 0usize;
            for (j, bin) in bins.iter().enumerate() {
                flow.advance(&f, bin, grid[j + 1].exp());
                if next < checkpoints.len() && j + 1 == checkpoints[next] {
                    out.push(flow.f_matrix.frobenius_sq());
                    next += 1;
                }
            }
            Ok::<_, sl2drift::CoreError>(out)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
    })?;
    let mut csv = String::from("l,mean_F2,se,ref_2lambda,rel_err,z\n");
    for (slot, &cp) in checkpoints.iter().enumerate() {
        let l = grid[cp].exp();
        let s = mc_mean(samples.iter().map(|row| row[slot])).map_err(RunError::from_core)?;
        let reference = 2.0 * sm.lambda_of(l * l - 1.0);
        let rel = (s.mean() - reference) / reference;
        let z = (s.mean() - reference) / s.std_error();
        writeln!(
            csv,
            "{l},{},{},{reference},{rel},{z}",
            s.mean(),
            s.std_error()
        )
        .unwrap();
    }
    Ok(csv)
}

pub fn pde_run(cfg: &PdeRunConfig) -> Result<String, RunError> {
    let field = sample_field(
        cfg.epsilon,
        0.0,
        cfg.torus_side,
        cfg.grid_n,
        cfg.master_seed,
    )?;
    let x = cfg.x;
    let x_norm = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let times = log_output_times(cfg.t_end, 64, cfg.dt);
    let series = solve_phi_probes(
        &field,
        cfg.dt,
        &times,
        &[x, [0.0, 0.0]],
        PdeOptions::default(),
    )?;
    let stat = increment_statistic(&series, 0, 1);
    let reference = increment_reference(cfg.epsilon, x_norm, cfg.t_end);
    let coupling = theorem1_residual(&field, x, cfg.t_end, cfg.dt, cfg.shells_per_efold)?;
    let mut csv = String::from("quantity,value\n");
    for (name, value) in [
        ("t_end", cfg.t_end),
        ("x_norm", x_norm),
        ("increment_stat", stat),
        ("increment_reference", reference),
        ("coupling_residual", coupling.residual),
        ("coupled_flow_norm_sq", coupling.f_norm_sq),
    ] {
        writeln!(csv, "{name},{value}").unwrap();
    }
    Ok(csv)
}

impl RunError {
    fn from_core(e: sl2drift::CoreError) -> Self {
        RunError::from(e)
    }
}
