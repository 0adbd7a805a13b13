//! One-dimensional companion processes of the matrix diffusion: the
//! Bessel-type process `R`, geometric Brownian motion `S`, the planar
//! Bessel process `X`, the monotone transform linking them, and the
//! intermittency statistics (moments, mass concentration).

use crate::error::{CoreError, Result};
use crate::quad::integrate_adaptive;
use crate::rng::{normal_pair, seed_stream, standard_normal};
use crate::sl2::{frobenius_r, CovarianceSpec, Sl2Walker};
use crate::stats::{indexed_map, ratio_with_se};

/// A sampled scalar trajectory together with its driving increments.
#[derive(Debug, Clone)]
pub struct ScalarPath {
    pub tau_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub driver_increments: Vec<f64>,
    pub seed: u64,
}

impl ScalarPath {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("nonempty path")
    }
}

/// Three coupled paths driven by one increment sequence: the transformed
/// process `S̃ = S(R)`, geometric Brownian motion `S`, and the planar
/// Bessel process `X`.
#[derive(Debug, Clone)]
pub struct ComparisonTriple {
    pub s_tilde: ScalarPath,
    pub s: ScalarPath,
    pub x: ScalarPath,
}

/// Exact solution of geometric Brownian motion, `S_τ = e^{τ/2 + w}`.
pub fn gbm_exact(tau: f64, w: f64) -> f64 {
    (0.5 * tau + w).exp()
}

/// Closed-form moments `E S_τ^p = e^{p(p+1)τ/2}`.
pub fn gbm_moment(p: f64, tau: f64) -> f64 {
    (0.5 * p * (p + 1.0) * tau).exp()
}

/// p-th moment of the lognormal law of `S_τ` by deterministic quadrature of
/// the Gaussian density; returns (value, achieved error bound).
pub fn gbm_moment_quadrature(p: f64, tau: f64, tol: f64) -> Result<(f64, f64)> {
    if !(tau > 0.0) {
        return Err(CoreError::InvalidParameter(
            "gbm_moment_quadrature needs tau > 0".into(),
        ));
    }
    let sigma = tau.sqrt();
    let norm = 1.0 / (std::f64::consts::TAU * tau).sqrt();
    let f = move |w: f64| norm * (0.5 * p * tau + p * w - w * w / (2.0 * tau)).exp();
    // The integrand peaks at w = pτ and decays on the scale √τ.
    let center = p * tau;
    let half_width = 14.0 * sigma + 1.0;
    integrate_adaptive(&f, center - half_width, center + half_width, tol)
}

/// Mass carried by the high super-level set `{S ≥ (E S)^{3/2}}` as a
/// fraction of `E S`, computed by quadrature of the lognormal density.
/// Equals 1/2 for every `τ > 0`.
pub fn mass_concentration_quadrature(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(CoreError::InvalidParameter(
            "mass_concentration_quadrature needs tau > 0".into(),
        ));
    }
    let sigma = tau.sqrt();
    let norm = 1.0 / (std::f64::consts::TAU * tau).sqrt();
    // E S I(S ≥ e^{3τ/2}) = ∫_τ^∞ e^{τ/2 + w} e^{-w²/2τ} dw/√(2πτ);
    // the threshold S ≥ (E S)^{3/2} is w ≥ τ on the Gaussian level.
    let f = move |w: f64| norm * (0.5 * tau + w - w * w / (2.0 * tau)).exp();
    let upper = tau + 14.0 * sigma + 1.0;
    let (integral, _err) = integrate_adaptive(&f, tau, upper, 1e-12)?;
    Ok(integral / tau.exp())
}

/// Monotone map `S(R) = exp(arccosh R) = R + √(R²−1)` from `[1,∞)` onto
/// itself. Inputs within `1e-12` below 1 are clamped to the boundary.
pub fn s_of_r(r: f64) -> Result<f64> {
    if r < 1.0 - 1e-12 {
        return Err(CoreError::InvalidParameter(format!(
            "s_of_r needs R >= 1, got {r}"
        )));
    }
    let r = r.max(1.0);
    Ok(r + (r * r - 1.0).sqrt())
}

/// Inverse transform `R(S) = (S + 1/S)/2 = cosh(ln S)`.
pub fn r_of_s(s: f64) -> Result<f64> {
    if s < 1.0 - 1e-12 {
        return Err(CoreError::InvalidParameter(format!(
            "r_of_s needs S >= 1, got {s}"
        )));
    }
    let s = s.max(1.0);
    Ok(0.5 * (s + 1.0 / s))
}

fn check_time_step(tau_end: f64, dt: f64) -> Result<usize> {
    if !(tau_end > 0.0) || !(dt > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "need tau_end > 0 and dt > 0, got tau_end={tau_end}, dt={dt}"
        )));
    }
    Ok((tau_end / dt).round().max(1.0) as usize)
}

/// Euler–Maruyama for `dR = R dτ + √(R²−1) dw`, `R₀ = 1`, with a post-step
/// clamp at the boundary `R = 1` (the clamp removes discretization
/// undershoot only; the continuous process never reaches the boundary).
pub fn simulate_r_scalar(
    tau_end: f64,
    dt: f64,
    master_seed: u64,
    stream: u64,
) -> Result<ScalarPath> {
    let n = check_time_step(tau_end, dt)?;
    let mut src = seed_stream(master_seed, stream);
    let mut values = Vec::with_capacity(n + 1);
    let mut driver = Vec::with_capacity(n);
    let mut tau_grid = Vec::with_capacity(n + 1);
    let sqrt_dt = dt.sqrt();
    let mut r = 1.0f64;
    values.push(r);
    tau_grid.push(0.0);
    for j in 0..n {
        let dw = sqrt_dt * standard_normal(&mut src);
        r = (r + r * dt + (r * r - 1.0).max(0.0).sqrt() * dw).max(1.0);
        driver.push(dw);
        values.push(r);
        tau_grid.push((j + 1) as f64 * dt);
    }
    Ok(ScalarPath {
        tau_grid,
        values,
        driver_increments: driver,
        seed: master_seed,
    })
}

/// Terminal value of the `R` path together with the summed driver, without
/// materializing the trajectory.
pub fn r_terminal(tau_end: f64, dt: f64, master_seed: u64, stream: u64) -> Result<(f64, f64)> {
    let n = check_time_step(tau_end, dt)?;
    let mut src = seed_stream(master_seed, stream);
    let sqrt_dt = dt.sqrt();
    let mut r = 1.0f64;
    let mut w = 0.0f64;
    for _ in 0..n {
        let dw = sqrt_dt * standard_normal(&mut src);
        r = (r + r * dt + (r * r - 1.0).max(0.0).sqrt() * dw).max(1.0);
        w += dw;
    }
    Ok((r, w))
}

/// Count grid points with `τ ≥ tau_from` where the clamped `R` path sits
/// exactly at the boundary value 1.
pub fn r_boundary_hits_after(
    tau_from: f64,
    tau_end: f64,
    dt: f64,
    master_seed: u64,
    stream: u64,
) -> Result<usize> {
    let n = check_time_step(tau_end, dt)?;
    let mut src = seed_stream(master_seed, stream);
    let sqrt_dt = dt.sqrt();
    let mut r = 1.0f64;
    let mut hits = 0usize;
    for j in 0..n {
        let dw = sqrt_dt * standard_normal(&mut src);
        r = (r + r * dt + (r * r - 1.0).max(0.0).sqrt() * dw).max(1.0);
        if (j + 1) as f64 * dt >= tau_from && r == 1.0 {
            hits += 1;
        }
    }
    Ok(hits)
}

/// The planar Bessel process `dX = dτ/(2X) + dw` from `X₀ = 0`. The first
/// step is sampled exactly as the norm of a two-dimensional Gaussian; the
/// singular drift of every later step is integrated implicitly (an
/// explicit `dt/(2X)` kick diverges on the recurrent visits near the
/// origin and makes sample moments heavy-tailed).
pub fn simulate_bessel2d(
    tau_end: f64,
    dt: f64,
    master_seed: u64,
    stream: u64,
) -> Result<ScalarPath> {
    let n = check_time_step(tau_end, dt)?;
    let mut src = seed_stream(master_seed, stream);
    let sqrt_dt = dt.sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut driver = Vec::with_capacity(n);
    let mut tau_grid = Vec::with_capacity(n + 1);
    values.push(0.0);
    tau_grid.push(0.0);
    let (g1, g2) = normal_pair(&mut src);
    let mut x = sqrt_dt * (g1 * g1 + g2 * g2).sqrt();
    // The effective first driver increment attributes the exact first step
    // to the noise after removing the mean drift contribution.
    driver.push(x - 0.5 * dt);
    values.push(x);
    tau_grid.push(dt);
    for j in 1..n {
        let dw = sqrt_dt * standard_normal(&mut src);
        x = implicit_bessel_step(x + dw, dt);
        driver.push(dw);
        values.push(x);
        tau_grid.push((j + 1) as f64 * dt);
    }
    Ok(ScalarPath {
        tau_grid,
        values,
        driver_increments: driver,
        seed: master_seed,
    })
}

/// Terminal value of the planar Bessel path.
pub fn bessel2d_terminal(tau_end: f64, dt: f64, master_seed: u64, stream: u64) -> Result<f64> {
    let n = check_time_step(tau_end, dt)?;
    let mut src = seed_stream(master_seed, stream);
    let sqrt_dt = dt.sqrt();
    let (g1, g2) = normal_pair(&mut src);
    let mut x = sqrt_dt * (g1 * g1 + g2 * g2).sqrt();
    for _ in 1..n {
        let dw = sqrt_dt * standard_normal(&mut src);
        x = implicit_bessel_step(x + dw, dt);
    }
    Ok(x)
}

/// Drift-implicit resolution of `x' = x + dt/(2x') + dw`: the positive
/// root `x' = ½(u + √(u² + 2dt))` with `u = x + dw`. Monotone in `u` and
/// strictly positive, so it never needs a reflection or a floor.
#[inline]
fn implicit_bessel_step(u: f64, dt: f64) -> f64 {
    0.5 * (u + (u * u + 2.0 * dt).sqrt())
}

/// The transformed drift in excess of the Bessel singularity:
/// `½coth(z) − 1/(2z) ∈ [0, ½)`, series near 0.
#[inline]
fn coth_excess(z: f64) -> f64 {
    if z < 1e-4 {
        z / 6.0 - z * z * z / 90.0
    } else {
        0.5 + 1.0 / f64::exp_m1(2.0 * z) - 0.5 / z
    }
}

/// One coupled step of the triple `(lnS̃, lnS, X)`; all three share `dw`.
///
/// The singular `1/(2·)` part of the `lnS̃` and `X` drifts is integrated
/// implicitly; the update is monotone in the shared noise, which preserves
/// the continuum comparisons pathwise (an explicit Euler kick `dt/(2x)`
/// differs between the two paths near the corner by far more than O(dt)).
struct TripleStepper {
    z: f64,    // ln S̃
    ln_s: f64, // ln S
    x: f64,
    dt: f64,
}

impl TripleStepper {
    /// Initialize at τ = dt from the exactly sampled Bessel first step.
    /// `ln S̃` starts from the Bessel value (both vanish at τ = 0 and the
    /// transformed drift dominates the Bessel drift), and the first driver
    /// increment is defined so that `ln S` matches it exactly at τ = dt.
    fn init(x1: f64, dt: f64) -> (Self, f64) {
        let dw0 = x1 - 0.5 * dt;
        (
            Self {
                z: x1,
                ln_s: 0.5 * dt + dw0,
                x: x1,
                dt,
            },
            dw0,
        )
    }

    #[inline]
    fn step(&mut self, dw: f64) {
        let dt = self.dt;
        self.z = implicit_bessel_step(self.z + coth_excess(self.z) * dt + dw, dt);
        self.ln_s += 0.5 * dt + dw;
        self.x = implicit_bessel_step(self.x + dw, dt);
    }
}

/// Integrate the comparison triple with one shared driver: the transform
/// `ln S̃` with drift `coth(ln S̃)/2`, geometric Brownian motion `ln S` with
/// drift 1/2 (integrated exactly), and the planar Bessel process `X`. The
/// singular drift parts are integrated implicitly (see [`TripleStepper`]).
pub fn simulate_comparison_triple(
    tau_end: f64,
    dt: f64,
    master_seed: u64,
    stream: u64,
) -> Result<ComparisonTriple> {
    let n = check_time_step(tau_end, dt)?;
    let mut src = seed_stream(master_seed, stream);
    let sqrt_dt = dt.sqrt();
    let mut tau_grid = Vec::with_capacity(n + 1);
    let mut driver = Vec::with_capacity(n);
    let mut vt = Vec::with_capacity(n + 1);
    let mut vs = Vec::with_capacity(n + 1);
    let mut vx = Vec::with_capacity(n + 1);
    tau_grid.push(0.0);
    vt.push(1.0);
    vs.push(1.0);
    vx.push(0.0);
    let (g1, g2) = normal_pair(&mut src);
    let x1 = sqrt_dt * (g1 * g1 + g2 * g2).sqrt();
    let (mut stepper, dw0) = TripleStepper::init(x1, dt);
    driver.push(dw0);
    tau_grid.push(dt);
    vt.push(stepper.z.exp());
    vs.push(stepper.ln_s.exp());
    vx.push(stepper.x);
    for j in 1..n {
        let dw = sqrt_dt * standard_normal(&mut src);
        stepper.step(dw);
        driver.push(dw);
        tau_grid.push((j + 1) as f64 * dt);
        vt.push(stepper.z.exp());
        vs.push(stepper.ln_s.exp());
        vx.push(stepper.x);
    }
    let mk = |values: Vec<f64>| ScalarPath {
        tau_grid: tau_grid.clone(),
        values,
        driver_increments: driver.clone(),
        seed: master_seed,
    };
    Ok(ComparisonTriple {
        s_tilde: mk(vt),
        s: mk(vs),
        x: mk(vx),
    })
}

/// Violation counts for the pathwise comparison inequalities, checked at
/// every grid point with an `O(dt)` discretization slack.
#[derive(Debug, Clone, Copy, Default)]
pub struct TripleViolations {
    /// `ln S̃ ≥ X − slack·dt`
    pub log_vs_bessel: usize,
    /// `S̃ ≥ S(1 − slack·dt)`
    pub tilde_vs_gbm: usize,
    /// `2 R(S̃) ≥ S(1 − slack·dt)`
    pub r_vs_gbm: usize,
    /// Grid points at `τ ≥ 0.1` where `R(S̃)` sits on the boundary value 1
    /// (strict positivity of the transformed process).
    pub boundary_contacts: usize,
}

impl TripleViolations {
    pub fn total(&self) -> usize {
        self.log_vs_bessel + self.tilde_vs_gbm + self.r_vs_gbm + self.boundary_contacts
    }
}

/// Stream one coupled triple and count comparison violations at every grid
/// point (slack `slack·dt`), without materializing the paths.
pub fn comparison_triple_violations(
    tau_end: f64,
    dt: f64,
    slack: f64,
    master_seed: u64,
    stream: u64,
) -> Result<TripleViolations> {
    let n = check_time_step(tau_end, dt)?;
    let mut src = seed_stream(master_seed, stream);
    let sqrt_dt = dt.sqrt();
    let mut counts = TripleViolations::default();
    let (g1, g2) = normal_pair(&mut src);
    let x1 = sqrt_dt * (g1 * g1 + g2 * g2).sqrt();
    let (mut st, _) = TripleStepper::init(x1, dt);
    let tol = slack * dt;
    for j in 0..n {
        if j > 0 {
            let dw = sqrt_dt * standard_normal(&mut src);
            st.step(dw);
        }
        let s_tilde = st.z.exp();
        let s = st.ln_s.exp();
        if st.z < st.x - tol {
            counts.log_vs_bessel += 1;
        }
        if s_tilde < s * (1.0 - tol) {
            counts.tilde_vs_gbm += 1;
        }
        if s_tilde + 1.0 / s_tilde < s * (1.0 - tol) {
            counts.r_vs_gbm += 1;
        }
        if (j + 1) as f64 * dt >= 0.1 && r_of_s(s_tilde).unwrap_or(1.0) == 1.0 {
            counts.boundary_contacts += 1;
        }
    }
    Ok(counts)
}

/// Which process supplies the `R` samples for the mass concentration
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RSource {
    /// `R = |F|²/2` from matrix-diffusion paths.
    Matrix,
    /// The scalar Bessel-type Itô evolution.
    Scalar,
}

/// Monte Carlo estimate of `E R I(R ≥ ½ (E R)^{3/2}) / E R` at time `tau`,
/// with a delta-method standard error. `E R` in the threshold is the
/// sample mean; its variability affects the ratio only at second order.
pub fn r_mass_concentration_mc(
    tau: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
    source: RSource,
) -> Result<(f64, f64)> {
    if n_paths < 2 {
        return Err(CoreError::InvalidParameter("need n_paths >= 2".into()));
    }
    let samples: Vec<f64> = match source {
        RSource::Scalar => indexed_map(n_paths, |i| {
            r_terminal(tau, dt, master_seed, i as u64).map(|(r, _)| r)
        })
        .into_iter()
        .collect::<Result<_>>()?,
        RSource::Matrix => {
            let cov = CovarianceSpec::canonical();
            let cells = (tau / dt).round() as u64;
            indexed_map(n_paths, |i| {
                let mut w = Sl2Walker::new(dt, &cov, master_seed, i as u64, 0)?;
                w.advance_to_cell(cells)?;
                Ok(frobenius_r(w.state()))
            })
            .into_iter()
            .collect::<Result<_>>()?
        }
    };
    let mean = samples.iter().sum::<f64>() / n_paths as f64;
    let threshold = 0.5 * mean.powf(1.5);
    let numers: Vec<f64> = samples
        .iter()
        .map(|&r| if r >= threshold { r } else { 0.0 })
        .collect();
    Ok(ratio_with_se(&numers, &samples))
}
