//! The physical side at desk scale: particle paths in a frozen velocity
//! field, the pseudo-spectral solver for the corrector-form
//! advection-diffusion equation `∂_t φ − b·∇φ − Δφ = b`, and the increment
//! and residual statistics built on top of them.

use num_complex::Complex64;

use crate::corrector::{lnl_grid, ScaleMap};
use crate::error::{CoreError, Result};
use crate::fft::{signed_index, wrap_index, Fft2};
use crate::field::{coupled_b_path, realize_field, RealizedField, SpectralField};
use crate::rng::{normal_pair, seed_stream};
use crate::sl2::Sl2Matrix;

/// Catmull-Rom weights for a unit-spaced stencil at fractional offset `t`.
#[inline]
fn catmull_rom(t: f64) -> [f64; 4] {
    [
        0.5 * (((-t + 2.0) * t - 1.0) * t),
        0.5 * (((3.0 * t - 5.0) * t) * t + 2.0),
        0.5 * (((-3.0 * t + 4.0) * t + 1.0) * t),
        0.5 * ((t - 1.0) * t * t),
    ]
}

impl RealizedField {
    /// Periodic bicubic (Catmull-Rom) interpolation of both components.
    pub fn eval_bicubic(&self, x: [f64; 2]) -> [f64; 2] {
        let n = self.grid_n as i64;
        let u = x[0] / self.dx;
        let v = x[1] / self.dx;
        let i0 = u.floor();
        let j0 = v.floor();
        let wu = catmull_rom(u - i0);
        let wv = catmull_rom(v - j0);
        let mut out = [0.0; 2];
        for (c, comp) in self.comps.iter().enumerate() {
            let mut acc = 0.0;
            for (a, wa) in wu.iter().enumerate() {
                let ia = (i0 as i64 + a as i64 - 1).rem_euclid(n) as usize;
                let mut row = 0.0;
                for (b, wb) in wv.iter().enumerate() {
                    let jb = (j0 as i64 + b as i64 - 1).rem_euclid(n) as usize;
                    row += wb * comp[ia * self.grid_n + jb];
                }
                acc += wa * row;
            }
            out[c] = acc;
        }
        out
    }
}

/// A particle trajectory; positions are unwrapped (the winding over the
/// torus is kept in the coordinates, the field is evaluated modulo Λ).
#[derive(Debug, Clone)]
pub struct ParticlePath {
    pub t_grid: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    pub seed: u64,
}

fn check_cfl(field: &RealizedField, dt: f64) -> Result<()> {
    let bmax = field.max_abs();
    if dt * bmax > field.dx {
        return Err(CoreError::CflViolation(format!(
            "dt·|b|_max = {} exceeds grid spacing {}",
            dt * bmax,
            field.dx
        )));
    }
    Ok(())
}

/// Euler–Maruyama for `dX = b(X) dt + √2 dW` with bicubic drift lookups.
pub fn simulate_particle(
    field: &RealizedField,
    start: [f64; 2],
    t_end: f64,
    dt: f64,
    master_seed: u64,
    stream: u64,
) -> Result<ParticlePath> {
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(CoreError::InvalidParameter(
            "simulate_particle needs t_end > 0 and dt > 0".into(),
        ));
    }
    check_cfl(field, dt)?;
    let n = (t_end / dt).round().max(1.0) as usize;
    let mut rng = seed_stream(master_seed, stream);
    let noise = (2.0 * dt).sqrt();
    let lambda = field.torus_side;
    let mut x = start;
    let mut t_grid = Vec::with_capacity(n + 1);
    let mut positions = Vec::with_capacity(n + 1);
    t_grid.push(0.0);
    positions.push(x);
    for j in 0..n {
        let wrapped = [x[0].rem_euclid(lambda), x[1].rem_euclid(lambda)];
        let b = field.eval_bicubic(wrapped);
        let (g1, g2) = normal_pair(&mut rng);
        x[0] += b[0] * dt + noise * g1;
        x[1] += b[1] * dt + noise * g2;
        t_grid.push((j + 1) as f64 * dt);
        positions.push(x);
    }
    Ok(ParticlePath {
        t_grid,
        positions,
        seed: master_seed,
    })
}

/// Terminal unwrapped position only.
pub fn particle_terminal(
    field: &RealizedField,
    start: [f64; 2],
    t_end: f64,
    dt: f64,
    master_seed: u64,
    stream: u64,
) -> Result<[f64; 2]> {
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(CoreError::InvalidParameter(
            "particle_terminal needs t_end > 0 and dt > 0".into(),
        ));
    }
    check_cfl(field, dt)?;
    let n = (t_end / dt).round().max(1.0) as usize;
    let mut rng = seed_stream(master_seed, stream);
    let noise = (2.0 * dt).sqrt();
    let lambda = field.torus_side;
    let mut x = start;
    for _ in 0..n {
        let wrapped = [x[0].rem_euclid(lambda), x[1].rem_euclid(lambda)];
        let b = field.eval_bicubic(wrapped);
        let (g1, g2) = normal_pair(&mut rng);
        x[0] += b[0] * dt + noise * g1;
        x[1] += b[1] * dt + noise * g2;
    }
    Ok(x)
}

/// Term toggles for the advection-diffusion stepper (used by the
/// conservation checks; production runs keep all three on).
#[derive(Debug, Clone, Copy)]
pub struct PdeOptions {
    pub advection: bool,
    pub diffusion: bool,
    pub forcing: bool,
}

impl Default for PdeOptions {
    fn default() -> Self {
        Self {
            advection: true,
            diffusion: true,
            forcing: true,
        }
    }
}

/// Pseudo-spectral semi-implicit solver for `∂_t φ = b·∇φ + Δφ + b` on the
/// torus: exact integrating factor for the diffusion, explicit transport
/// computed in real space with 2/3-rule dealiasing, forcing added per step.
pub struct PdeSolver {
    n: usize,
    dt: f64,
    t: f64,
    fft: Fft2,
    phi_hat: [Vec<Complex64>; 2],
    b_hat: [Vec<Complex64>; 2],
    b_real: [Vec<f64>; 2],
    heat: Vec<f64>,
    keep: Vec<bool>,
    kx: Vec<f64>,
    opts: PdeOptions,
    torus_side: f64,
}

impl PdeSolver {
    pub fn new(field: &SpectralField, dt: f64, opts: PdeOptions) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(CoreError::InvalidParameter("dt must be positive".into()));
        }
        let real = realize_field(field)?;
        check_cfl(&real, dt)?;
        let n = field.grid_n;
        let mut b_hat = [
            vec![Complex64::default(); n * n],
            vec![Complex64::default(); n * n],
        ];
        let dk = crate::field::mode_spacing(field.torus_side);
        for m in &field.modes {
            let coeffs = m.coeffs(dk);
            let i1 = wrap_index(m.n1 as i64, n);
            let i2 = wrap_index(m.n2 as i64, n);
            let j1 = wrap_index(-m.n1 as i64, n);
            let j2 = wrap_index(-m.n2 as i64, n);
            for c in 0..2 {
                b_hat[c][i1 * n + i2] = coeffs[c];
                b_hat[c][j1 * n + j2] = coeffs[c].conj();
            }
        }
        let kx: Vec<f64> = (0..n).map(|i| signed_index(i, n) as f64 * dk).collect();
        let cutoff = n as i64 / 3;
        let mut heat = vec![0.0; n * n];
        let mut keep = vec![false; n * n];
        for i1 in 0..n {
            for i2 in 0..n {
                let k2 = kx[i1] * kx[i1] + kx[i2] * kx[i2];
                heat[i1 * n + i2] = (-k2 * dt).exp();
                keep[i1 * n + i2] = signed_index(i1, n).abs() < cutoff
                    && signed_index(i2, n).abs() < cutoff
                    && (i1, i2) != (0, 0);
            }
        }
        Ok(Self {
            n,
            dt,
            t: 0.0,
            fft: Fft2::new(n),
            phi_hat: [
                vec![Complex64::default(); n * n],
                vec![Complex64::default(); n * n],
            ],
            b_hat,
            b_real: real.comps.clone(),
            heat,
            keep,
            kx,
            opts,
            torus_side: field.torus_side,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Replace the state with the velocity field itself (used by the
    /// transport conservation checks).
    pub fn seed_phi_with_velocity(&mut self) {
        self.phi_hat = self.b_hat.clone();
    }

    /// Spectral k = 0 coefficient of each component (the spatial mean).
    pub fn mean_phi(&self) -> [f64; 2] {
        [self.phi_hat[0][0].re, self.phi_hat[1][0].re]
    }

    /// Σ |φ̂|² over modes and components (the grid-mean square of φ).
    pub fn l2_norm_sq(&self) -> f64 {
        self.phi_hat
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    fn derivative_grid(&self, comp: usize, axis: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::default(); n * n];
        for i1 in 0..n {
            for i2 in 0..n {
                let k = if axis == 0 { self.kx[i1] } else { self.kx[i2] };
                let idx = i1 * n + i2;
                out[idx] = self.phi_hat[comp][idx] * Complex64::new(0.0, k);
            }
        }
        self.fft.synthesize(&mut out);
        out
    }

    pub fn step(&mut self) -> Result<()> {
        let n2 = self.n * self.n;
        let mut transport = [vec![0.0; 0], vec![0.0; 0]];
        if self.opts.advection {
            for comp in 0..2 {
                let d1 = self.derivative_grid(comp, 0);
                let d2 = self.derivative_grid(comp, 1);
                let mut tr = vec![0.0; n2];
                for c in 0..n2 {
                    tr[c] = self.b_real[0][c] * d1[c].re + self.b_real[1][c] * d2[c].re;
                }
                transport[comp] = tr;
            }
        }
        for comp in 0..2 {
            let mut t_hat = if self.opts.advection {
                let mut grid: Vec<Complex64> = transport[comp]
                    .iter()
                    .map(|&v| Complex64::new(v, 0.0))
                    .collect();
                self.fft.analyze(&mut grid);
                grid
            } else {
                vec![Complex64::default(); n2]
            };
            for (idx, keep) in self.keep.iter().enumerate() {
                if !keep {
                    t_hat[idx] = Complex64::default();
                }
            }
            let phi = &mut self.phi_hat[comp];
            for idx in 0..n2 {
                let force = if self.opts.forcing {
                    self.b_hat[comp][idx]
                } else {
                    Complex64::default()
                };
                let mut next = phi[idx] + (t_hat[idx] + force) * self.dt;
                if self.opts.diffusion {
                    next *= self.heat[idx];
                }
                phi[idx] = next;
            }
        }
        self.t += self.dt;
        if !self.phi_hat[0][1].is_finite() || !self.phi_hat[1][self.n].is_finite() {
            return Err(CoreError::Numerical(format!(
                "solution lost finiteness; last stable time {}",
                self.t - self.dt
            )));
        }
        Ok(())
    }

    /// Step until the requested time (snapped to a whole step count).
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        let steps = ((t_target - self.t) / self.dt).round().max(0.0) as u64;
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    /// Synthesize φ on the grid.
    pub fn phi_real(&self) -> RealizedField {
        let n = self.n;
        let mut comps = [vec![0.0; 0], vec![0.0; 0]];
        for (c, out) in comps.iter_mut().enumerate() {
            let mut grid = self.phi_hat[c].clone();
            self.fft.synthesize(&mut grid);
            *out = grid.iter().map(|z| z.re).collect();
        }
        RealizedField {
            grid_n: n,
            torus_side: self.torus_side,
            dx: self.torus_side / n as f64,
            comps,
        }
    }
}

/// φ sampled at probe points over a set of output times.
#[derive(Debug, Clone)]
pub struct PhiProbeSeries {
    pub times: Vec<f64>,
    pub probes: Vec<[f64; 2]>,
    /// `values[time_index][probe_index]`.
    pub values: Vec<Vec<[f64; 2]>>,
}

/// The output-time grid used by the time averages: t = 0 plus
/// logarithmically spaced times in [t_end/100, t_end], snapped to whole
/// steps of `dt`.
pub fn log_output_times(t_end: f64, count: usize, dt: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let lo = (t_end / 100.0).max(dt);
    for j in 0..count {
        let f = j as f64 / (count - 1).max(1) as f64;
        let t = lo * (t_end / lo).powf(f);
        let snapped = (t / dt).round().max(1.0) * dt;
        if snapped > *times.last().unwrap() && snapped <= t_end + 0.5 * dt {
            times.push(snapped);
        }
    }
    times
}

/// Run the solver and collect φ at the probes for each output time.
pub fn solve_phi_probes(
    field: &SpectralField,
    dt: f64,
    output_times: &[f64],
    probes: &[[f64; 2]],
    opts: PdeOptions,
) -> Result<PhiProbeSeries> {
    let mut solver = PdeSolver::new(field, dt, opts)?;
    let mut times = Vec::with_capacity(output_times.len());
    let mut values = Vec::with_capacity(output_times.len());
    for &t in output_times {
        solver.advance_to(t)?;
        let real = solver.phi_real();
        let row: Vec<[f64; 2]> = probes
            .iter()
            .map(|&p| {
                let wrapped = [
                    p[0].rem_euclid(field.torus_side),
                    p[1].rem_euclid(field.torus_side),
                ];
                real.eval_bicubic(wrapped)
            })
            .collect();
        times.push(solver.t());
        values.push(row);
    }
    Ok(PhiProbeSeries {
        times,
        probes: probes.to_vec(),
        values,
    })
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 1..times.len() {
        acc += 0.5 * (values[j] + values[j - 1]) * (times[j] - times[j - 1]);
    }
    acc
}

/// Time-averaged normalized squared increment
/// `(1/T) ∫₀ᵀ |x + φ(x,t) − φ(0,t)|²/|x|² dt` by trapezoid over the
/// output times; the series must carry probes at `x` and at the origin.
pub fn increment_statistic(series: &PhiProbeSeries, x_index: usize, origin_index: usize) -> f64 {
    let x = series.probes[x_index];
    let x2 = x[0] * x[0] + x[1] * x[1];
    let t_end = *series.times.last().expect("nonempty series");
    let integrand: Vec<f64> = series
        .values
        .iter()
        .map(|row| {
            let px = row[x_index];
            let p0 = row[origin_index];
            let dx = [x[0] + px[0] - p0[0], x[1] + px[1] - p0[1]];
            (dx[0] * dx[0] + dx[1] * dx[1]) / x2
        })
        .collect();
    trapezoid(&series.times, &integrand) / t_end
}

/// The right-hand shape of the increment law, `max{1, λ(T)/λ(|x|²)}`.
pub fn increment_reference(epsilon: f64, x_norm: f64, t_end: f64) -> f64 {
    let sm = ScaleMap::new(epsilon);
    (sm.lambda_of(t_end) / sm.lambda_of(x_norm * x_norm)).max(1.0)
}

/// Reference shape of the p-th increment moment,
/// `max{1, λ(T)/λ(|x|²)}^{1 + 3(p−1)/2}`.
pub fn intermittency_reference(epsilon: f64, x_norm: f64, t_end: f64, p: f64) -> f64 {
    increment_reference(epsilon, x_norm, t_end).powf(1.0 + 1.5 * (p - 1.0))
}

/// p-th empirical moment of an ensemble of increment statistics.
pub fn intermittency_moment(samples: &[f64], p: f64) -> f64 {
    samples.iter().map(|s| s.powf(p)).sum::<f64>() / samples.len() as f64
}

/// Output of the coupling residual diagnostic for one realization.
#[derive(Debug, Clone)]
pub struct CouplingResidual {
    /// `(1/T) ∫₀ᵀ |u(x,t) − u(0,t) − F†_{τ*,τ(T)} x|²/|x|² dt`.
    pub residual: f64,
    /// The same realization's increment statistic.
    pub increment_stat: f64,
    /// `|F_{τ*,τ(T)}|²` of the coupled matrix flow.
    pub f_norm_sq: f64,
}

/// Build the coupled matrix flow from a field realization over the scale
/// window `[τ(|x|²), τ(T)]` and measure the time-averaged residual between
/// the solution increments and the flow applied to `x`.
///
/// The flow is driven by the same realization through the band increments
/// of the coupling process; scale endpoints are snapped to the shell grid.
pub fn theorem1_residual(
    field: &SpectralField,
    x: [f64; 2],
    t_end: f64,
    dt: f64,
    shells_per_efold: usize,
) -> Result<CouplingResidual> {
    let x_norm = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if x_norm == 0.0 {
        return Err(CoreError::InvalidParameter(
            "theorem1_residual needs x away from the origin".into(),
        ));
    }
    // Scale endpoints: L* = √(1+|x|²) and L_T = √(1+T) carry τ(|x|²) and
    // τ(T) under the change of variables e^τ = λ(L²−1).
    let l_star = (1.0 + x_norm * x_norm).sqrt();
    let l_top = (1.0 + t_end).sqrt();
    let grid = lnl_grid(l_top, shells_per_efold);
    let b_path = coupled_b_path(field, &grid)?;
    let start = grid
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - l_star.ln())
                .abs()
                .total_cmp(&(b.1 - l_star.ln()).abs())
        })
        .map(|(j, _)| j)
        .unwrap_or(0);
    let mut f = Sl2Matrix::ID;
    if field.epsilon > 0.0 {
        for inc in b_path.increments()[start..].iter() {
            let m = f.matrix();
            f = Sl2Matrix::renormalize(m.add(&m.mul(&inc.to_matrix())))?;
        }
    }
    let times = log_output_times(t_end, 64, dt);
    let series = solve_phi_probes(field, dt, &times, &[x, [0.0, 0.0]], PdeOptions::default())?;
    let fx = f.matrix().apply_transposed(x);
    let x2 = x_norm * x_norm;
    let integrand: Vec<f64> = series
        .values
        .iter()
        .map(|row| {
            let du = [
                x[0] + row[0][0] - row[1][0] - fx[0],
                x[1] + row[0][1] - row[1][1] - fx[1],
            ];
            (du[0] * du[0] + du[1] * du[1]) / x2
        })
        .collect();
    let t_last = *series.times.last().unwrap();
    Ok(CouplingResidual {
        residual: trapezoid(&series.times, &integrand) / t_last,
        increment_stat: increment_statistic(&series, 0, 1),
        f_norm_sq: f.frobenius_sq(),
    })
}
