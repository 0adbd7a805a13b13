//! Divergence-free Gaussian velocity fields on a periodic torus, sampled
//! spectrally, with band cutoffs and the algebra-valued coupling process
//! built from the field at the origin.
//!
//! The whole-plane ensemble has spectral density `ε² (id − k̂⊗k̂)` on the
//! unit ball `|k| ≤ 1`; on a torus of side Λ each retained lattice mode
//! carries the cell weight `ε²·Δk²/(2π)` with `Δk = 2π/Λ`, so the
//! real-space covariance converges to the whole-plane one as Λ → ∞.
//! The projection onto the divergence-free subspace is exact: in two
//! dimensions every retained mode is proportional to `k⊥/|k|`.

pub use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::fft::{wrap_index, Fft2};
use crate::rng::{normal_pair, seed_stream};
use crate::sl2::{AlgebraVector, Mat2};

/// One retained Fourier mode of the velocity field (half-space storage;
/// the conjugate partner at `-k` is implicit).
///
/// The divergence-free polarization is carried structurally: the velocity
/// coefficients are `amp · k⊥` with `k⊥ = (−n₂, n₁)·Δk`, so `k·b̂(k)`
/// vanishes identically rather than to rounding.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub n1: i32,
    pub n2: i32,
    /// Complex scalar amplitude multiplying the unit-free `k⊥` direction.
    pub amp: Complex64,
}

impl Mode {
    /// Velocity coefficients `b̂(k) = amp·(−n₂Δk, n₁Δk)`.
    #[inline]
    pub fn coeffs(&self, dk: f64) -> [Complex64; 2] {
        [
            self.amp * (-(self.n2 as f64) * dk),
            self.amp * (self.n1 as f64 * dk),
        ]
    }
}

/// Spectral representation of one realization of the velocity ensemble.
#[derive(Debug, Clone)]
pub struct SpectralField {
    /// Torus side Λ.
    pub torus_side: f64,
    /// Grid points per axis used for real-space synthesis.
    pub grid_n: usize,
    /// Drift amplitude ε.
    pub epsilon: f64,
    /// Large-scale cutoff wavenumber 1/L; 0 means none.
    pub inner_cutoff: f64,
    /// Small-scale cutoff wavenumber, fixed at 1 by non-dimensionalization.
    pub outer_cutoff: f64,
    pub seed: u64,
    pub modes: Vec<Mode>,
}

/// Mode spacing 2π/Λ.
#[inline]
pub fn mode_spacing(torus_side: f64) -> f64 {
    std::f64::consts::TAU / torus_side
}

fn half_space(n1: i32, n2: i32) -> bool {
    n1 > 0 || (n1 == 0 && n2 > 0)
}

/// Sample one realization. `l_cut` is the large-scale cutoff length `L`
/// (retain `|k| ≥ 1/L`); pass 0 (or infinity) for no large-scale cutoff.
/// The small-scale cutoff is the unit wavenumber.
pub fn sample_field(
    epsilon: f64,
    l_cut: f64,
    torus_side: f64,
    grid_n: usize,
    seed: u64,
) -> Result<SpectralField> {
    if epsilon < 0.0 {
        return Err(CoreError::InvalidParameter("epsilon must be >= 0".into()));
    }
    if !(torus_side > 0.0) || grid_n < 4 || grid_n % 2 != 0 {
        return Err(CoreError::InvalidParameter(
            "need torus_side > 0 and an even grid_n >= 4".into(),
        ));
    }
    let dk = mode_spacing(torus_side);
    let outer = 1.0;
    if dk * ((grid_n / 2) as f64) < outer {
        return Err(CoreError::GridUnresolved(format!(
            "Nyquist wavenumber {} < outer cutoff 1",
            dk * (grid_n / 2) as f64
        )));
    }
    let inner = if l_cut > 0.0 && l_cut.is_finite() {
        1.0 / l_cut
    } else {
        0.0
    };
    if inner > 0.0 && dk > outer - inner {
        return Err(CoreError::GridUnresolved(format!(
            "mode spacing {dk} does not resolve the band [{inner}, 1]"
        )));
    }
    let n_max = (outer / dk).floor() as i32;
    if n_max as usize >= grid_n / 2 {
        return Err(CoreError::GridUnresolved(format!(
            "grid_n {} cannot index modes up to |n| = {}",
            grid_n, n_max
        )));
    }
    // Cell weight ε²Δk²/(2π) of the discretized spectral density.
    let weight = epsilon * epsilon * dk * dk / std::f64::consts::TAU;
    let amp = weight.sqrt();
    let mut rng = seed_stream(seed, 0);
    let mut modes = Vec::new();
    let mut draw_index: u128 = 0;
    for n1 in 0..=n_max {
        for n2 in -n_max..=n_max {
            if !half_space(n1, n2) {
                continue;
            }
            let r2 = (n1 as f64 * n1 as f64 + n2 as f64 * n2 as f64) * dk * dk;
            let r = r2.sqrt();
            let retained = r <= outer && (inner == 0.0 || r >= inner);
            if retained {
                // Noise is indexed by the mode's position in the fixed
                // enumeration, so generation order (or parallel splitting)
                // cannot change coefficients.
                rng.set_word_pos(draw_index * 4);
                let (xi, eta) = normal_pair(&mut rng);
                let zeta = Complex64::new(xi, eta) * std::f64::consts::FRAC_1_SQRT_2;
                // amp/|k| times the k⊥ direction is the unit polarization.
                modes.push(Mode {
                    n1,
                    n2,
                    amp: zeta * (amp / r),
                });
            }
            if half_space(n1, n2) && r <= outer {
                // Reserve the draw slot for every in-ball half mode so the
                // same (seed, mode) pair maps to the same noise for any
                // inner cutoff.
                draw_index += 1;
            }
        }
    }
    Ok(SpectralField {
        torus_side,
        grid_n,
        epsilon,
        inner_cutoff: inner,
        outer_cutoff: outer,
        seed,
        modes,
    })
}

impl SpectralField {
    /// Largest cutoff length resolved by this realization.
    pub fn max_l(&self) -> f64 {
        1.0 / self.inner_cutoff.max(mode_spacing(self.torus_side))
    }

    /// Maximum divergence residual `|k·b̂(k)|` over retained modes. The
    /// polarization is structural, so the integer cross term `−n₂n₁ + n₁n₂`
    /// vanishes exactly and the residual is identically zero.
    pub fn divergence_residual(&self) -> f64 {
        let dk = mode_spacing(self.torus_side);
        self.modes
            .iter()
            .map(|m| {
                let cross = -(m.n2 as f64) * (m.n1 as f64) + (m.n1 as f64) * (m.n2 as f64);
                m.amp.norm() * (cross * dk * dk).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Sum of squared coefficient magnitudes over the full mode set
    /// (spectral side of the Parseval identity).
    pub fn spectral_energy(&self) -> f64 {
        let dk = mode_spacing(self.torus_side);
        2.0 * self
            .modes
            .iter()
            .map(|m| {
                let c = m.coeffs(dk);
                c[0].norm_sqr() + c[1].norm_sqr()
            })
            .sum::<f64>()
    }

    /// Evaluate the field restricted to the band `kmin ≤ |k| < kmax` at a
    /// point by direct mode summation.
    pub fn point_value_band(&self, x: [f64; 2], kmin: f64, kmax: f64) -> [f64; 2] {
        let dk = mode_spacing(self.torus_side);
        let mut v = [0.0; 2];
        for m in &self.modes {
            let k = [m.n1 as f64 * dk, m.n2 as f64 * dk];
            let r = (k[0] * k[0] + k[1] * k[1]).sqrt();
            if r < kmin || r >= kmax {
                continue;
            }
            let phase = k[0] * x[0] + k[1] * x[1];
            let e = Complex64::new(phase.cos(), phase.sin());
            let c = m.coeffs(dk);
            // mode + conjugate partner
            v[0] += 2.0 * (c[0] * e).re;
            v[1] += 2.0 * (c[1] * e).re;
        }
        v
    }

    /// Evaluate the full retained field at a point.
    pub fn point_value(&self, x: [f64; 2]) -> [f64; 2] {
        self.point_value_band(x, 0.0, f64::INFINITY)
    }
}

/// Real-space samples of a realization on its N×N grid.
#[derive(Debug, Clone)]
pub struct RealizedField {
    pub grid_n: usize,
    pub torus_side: f64,
    /// Grid spacing Λ/N.
    pub dx: f64,
    /// Row-major component grids, index `i1 * n + i2` at position
    /// `(i1·dx, i2·dx)`.
    pub comps: [Vec<f64>; 2],
}

impl RealizedField {
    /// Grid mean of |b|².
    pub fn mean_square(&self) -> f64 {
        let n2 = (self.grid_n * self.grid_n) as f64;
        self.comps
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / n2
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |a, &v| a.max(v.abs()))
    }
}

/// Inverse transform of the spectral representation onto the grid.
pub fn realize_field(field: &SpectralField) -> Result<RealizedField> {
    let n = field.grid_n;
    let dk = mode_spacing(field.torus_side);
    let fft = Fft2::new(n);
    let mut comps: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (ci, out) in comps.iter_mut().enumerate() {
        let mut grid = vec![Complex64::default(); n * n];
        for m in &field.modes {
            let c = m.coeffs(dk)[ci];
            let i1 = wrap_index(m.n1 as i64, n);
            let i2 = wrap_index(m.n2 as i64, n);
            grid[i1 * n + i2] = c;
            let j1 = wrap_index(-m.n1 as i64, n);
            let j2 = wrap_index(-m.n2 as i64, n);
            grid[j1 * n + j2] = c.conj();
        }
        fft.synthesize(&mut grid);
        let max_im = grid.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let scale = field.epsilon.max(1e-30);
        if max_im > 1e-9 * scale {
            return Err(CoreError::Numerical(format!(
                "synthesis produced imaginary residue {max_im}"
            )));
        }
        *out = grid.iter().map(|z| z.re).collect();
    }
    Ok(RealizedField {
        grid_n: n,
        torus_side: field.torus_side,
        dx: field.torus_side / n as f64,
        comps,
    })
}

/// Spectral stream function ψ with `b = ∇⊥ψ = (−∂₂ψ, ∂₁ψ)`.
#[derive(Debug, Clone)]
pub struct StreamFunction {
    pub torus_side: f64,
    pub modes: Vec<(i32, i32, Complex64)>,
}

impl StreamFunction {
    /// Reconstruct the velocity coefficients `b̂ = i k⊥ ψ̂` mode-wise.
    pub fn curl_modes(&self) -> Vec<(i32, i32, [Complex64; 2])> {
        let dk = mode_spacing(self.torus_side);
        self.modes
            .iter()
            .map(|&(n1, n2, psi)| {
                let k = [n1 as f64 * dk, n2 as f64 * dk];
                let i = Complex64::new(0.0, 1.0);
                (n1, n2, [-i * k[1] * psi, i * k[0] * psi])
            })
            .collect()
    }
}

/// Stream function of a divergence-free field: `ψ̂ = −i (k⊥·b̂)/|k|²`.
/// The k = 0 mode is absent by the cutoff, so ψ is fixed by zero mean.
pub fn stream_function(field: &SpectralField) -> StreamFunction {
    let dk = mode_spacing(field.torus_side);
    let modes = field
        .modes
        .iter()
        .map(|m| {
            let k = [m.n1 as f64 * dk, m.n2 as f64 * dk];
            let k2 = k[0] * k[0] + k[1] * k[1];
            let c = m.coeffs(dk);
            let kperp_dot_b = -k[1] * c[0] + k[0] * c[1];
            let psi = Complex64::new(0.0, -1.0) * kperp_dot_b / k2;
            (m.n1, m.n2, psi)
        })
        .collect();
    StreamFunction {
        torus_side: field.torus_side,
        modes,
    }
}

/// The algebra-valued coupling process `L ↦ B_L` of one realization,
/// evaluated on a grid of log-scales.
#[derive(Debug, Clone)]
pub struct CoupledBPath {
    pub lnl_grid: Vec<f64>,
    pub values: Vec<AlgebraVector>,
    pub seed: u64,
}

impl CoupledBPath {
    /// Increments over consecutive grid intervals.
    pub fn increments(&self) -> Vec<AlgebraVector> {
        self.values.windows(2).map(|w| w[1].sub(&w[0])).collect()
    }
}

/// Evaluate `B_L = (√2/ε) ∇(−Δ)⁻¹ b_L(0)` on the given lnL grid as exact
/// mode sums over the bands `1/L ≤ |k| ≤ 1`, projected onto basis
/// coefficients. The grid must start at 0 (where the band is empty) and
/// stay within the resolved scales of the realization.
pub fn coupled_b_path(field: &SpectralField, lnl_grid: &[f64]) -> Result<CoupledBPath> {
    if lnl_grid.is_empty() || lnl_grid[0] != 0.0 {
        return Err(CoreError::InvalidParameter(
            "lnL grid must start at 0".into(),
        ));
    }
    if lnl_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidParameter(
            "lnL grid must be strictly increasing".into(),
        ));
    }
    let l_max = lnl_grid.last().unwrap().exp();
    if l_max > field.max_l() * (1.0 + 1e-12) {
        return Err(CoreError::GridUnresolved(format!(
            "L = {} beyond the resolved band (max L = {})",
            l_max,
            field.max_l()
        )));
    }
    let dk = mode_spacing(field.torus_side);
    let mut values = vec![AlgebraVector::ZERO; lnl_grid.len()];
    if field.epsilon > 0.0 {
        let scale = std::f64::consts::SQRT_2 / field.epsilon;
        for m in &field.modes {
            let k = [m.n1 as f64 * dk, m.n2 as f64 * dk];
            let k2 = k[0] * k[0] + k[1] * k[1];
            // Mode enters the band at lnL = ln(1/|k|). Modes on the outer
            // cutoff ring (entry ≤ 0) join with the first positive scale:
            // the band at L = 1 is empty by convention.
            let entry = -0.5 * k2.ln();
            let j = lnl_grid.partition_point(|&l| l < entry).max(1);
            if j >= lnl_grid.len() {
                continue;
            }
            // Mode plus conjugate partner: ∇(−Δ)⁻¹ contribution
            // −2 (k ⊗ Im ĉ)/|k|².
            let c = m.coeffs(dk);
            let im = [c[0].im, c[1].im];
            let f = -2.0 * scale / k2;
            let contrib = AlgebraVector::from_matrix(&Mat2([
                f * k[0] * im[0],
                f * k[0] * im[1],
                f * k[1] * im[0],
                f * k[1] * im[1],
            ]));
            values[j] = values[j].add(&contrib);
        }
        // Prefix-sum the per-bin contributions into band sums.
        for j in 1..values.len() {
            values[j] = values[j].add(&values[j - 1]);
        }
    }
    Ok(CoupledBPath {
        lnl_grid: lnl_grid.to_vec(),
        values,
        seed: field.seed,
    })
}

/// Quadrature of the circle average behind the coupling covariance.
#[derive(Debug, Clone)]
pub struct CircleTensor {
    /// Per-unit-lnL covariance of the coupling in basis coefficients
    /// (expected: diag(1/4, 1/4, 1/2)).
    pub coeff_cov: [[f64; 3]; 3],
    /// Average square of the trace component of the integrand (expected 0).
    pub trace_component: f64,
    /// Circle average of `k̂ ⊗ k̂` (expected id/2).
    pub k_outer_avg: Mat2,
    /// Rank-one decomposition of the per-unit-lnL covariance, usable by
    /// the postulate checks.
    pub measure: Vec<(f64, Mat2)>,
}

/// Compute the circle average `∮ dk [(p̂⊗k̂)⊗(p̂⊗k̂)]` (equivalently the
/// projector-form integrand) by uniform trapezoid quadrature, together
/// with `∮ dk k̂⊗k̂`. Uniform quadrature on the circle is exact for the
/// trigonometric-polynomial integrands here.
pub fn circle_tensor() -> CircleTensor {
    let nodes = 256usize;
    let mut coeff_cov = [[0.0f64; 3]; 3];
    let mut trace_component = 0.0;
    let mut k_outer = Mat2::ZERO;
    let mut measure = Vec::with_capacity(nodes);
    let w = 1.0 / nodes as f64;
    for i in 0..nodes {
        let theta = std::f64::consts::TAU * i as f64 / nodes as f64;
        let (s, c) = theta.sin_cos();
        let khat = [c, s];
        let phat = [-s, c];
        // Integrand in matrix form: p̂ ⊗ k̂.
        let m = Mat2([
            phat[0] * khat[0],
            phat[0] * khat[1],
            phat[1] * khat[0],
            phat[1] * khat[1],
        ]);
        let a = AlgebraVector::from_matrix(&m);
        let coeffs = [a.a1, a.a2, a.a3];
        for r in 0..3 {
            for col in 0..3 {
                // Factor 2 from the covariance normalization per unit lnL.
                coeff_cov[r][col] += 2.0 * w * coeffs[r] * coeffs[col];
            }
        }
        let tr_half = 0.5 * m.trace();
        trace_component += w * tr_half * tr_half;
        k_outer = k_outer.add(&Mat2([
            w * khat[0] * khat[0],
            w * khat[0] * khat[1],
            w * khat[1] * khat[0],
            w * khat[1] * khat[1],
        ]));
        measure.push((2.0 * w, m));
    }
    CircleTensor {
        coeff_cov,
        trace_component,
        k_outer_avg: k_outer,
        measure,
    }
}

/// Deterministic covariance of the coupling `B` over the band
/// `kmin ≤ |k| ≤ kmax` on the mode lattice of a torus — the discretized
/// analytic reference the Monte Carlo estimates are gated against. It
/// converges to `ln(kmax/kmin)·diag(1/4, 1/4, 1/2)` as the torus grows.
pub fn coupling_covariance_lattice(torus_side: f64, kmin: f64, kmax: f64) -> [[f64; 3]; 3] {
    let dk = mode_spacing(torus_side);
    let n_max = (kmax / dk).floor() as i32;
    let mut cov = [[0.0f64; 3]; 3];
    for n1 in 0..=n_max {
        for n2 in -n_max..=n_max {
            if !half_space(n1, n2) {
                continue;
            }
            let r2 = (n1 as f64 * n1 as f64 + n2 as f64 * n2 as f64) * dk * dk;
            let r = r2.sqrt();
            if r < kmin || r > kmax {
                continue;
            }
            let theta = (n2 as f64).atan2(n1 as f64);
            let (s2t, c2t) = (2.0 * theta).sin_cos();
            // Coefficients of k̂⊗p̂ and the per-half-mode weight.
            let coeff = [-0.5 * s2t, 0.5 * c2t, -0.5];
            let w = 2.0 * dk * dk / (std::f64::consts::PI * r2);
            for a in 0..3 {
                for b in 0..3 {
                    cov[a][b] += w * coeff[a] * coeff[b];
                }
            }
        }
    }
    cov
}

/// Residual norms of the two covariance postulates for a rank-one measure
/// `Σ wᵢ δ_{Eᵢ}`: `‖Σ wᵢ Eᵢ²‖` (vanishing Itô–Stratonovich correction) and
/// `‖Σ wᵢ Eᵢ Eᵢᵀ − id‖` (unit normalization).
pub fn check_postulates(measure: &[(f64, Mat2)]) -> (f64, f64) {
    let mut sq = Mat2::ZERO;
    let mut gram = Mat2::ZERO;
    for (w, e) in measure {
        sq = sq.add(&e.mul(e).scale(*w));
        gram = gram.add(&e.mul(&e.transpose()).scale(*w));
    }
    let first = sq.frobenius_sq().sqrt();
    let second = gram.sub(&Mat2::ID).frobenius_sq().sqrt();
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2::CovarianceSpec;

    fn small_field(epsilon: f64, seed: u64) -> SpectralField {
        sample_field(epsilon, 0.0, 16.0 * std::f64::consts::PI, 64, seed).unwrap()
    }

    #[test]
    fn zero_amplitude_gives_zero_coefficients() {
        let f = small_field(0.0, 1);
        assert!(f.modes.iter().all(|m| m.amp.norm() == 0.0));
        let r = realize_field(&f).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn divergence_vanishes_exactly() {
        let f = small_field(0.5, 2);
        assert_eq!(f.divergence_residual(), 0.0);
    }

    #[test]
    fn parseval_identity() {
        let f = small_field(0.5, 3);
        let r = realize_field(&f).unwrap();
        let grid = r.mean_square();
        let spec = f.spectral_energy();
        assert!(
            (grid - spec).abs() <= 1e-10 * spec,
            "grid {grid} vs spectral {spec}"
        );
    }

    #[test]
    fn grid_rejections() {
        // Nyquist below the outer cutoff.
        assert!(sample_field(0.5, 0.0, 100.0 * std::f64::consts::PI, 64, 0).is_err());
        // Band narrower than the mode spacing.
        assert!(sample_field(0.5, 1.2, 4.0 * std::f64::consts::PI, 64, 0).is_err());
    }

    #[test]
    fn inner_cutoff_restricts_band() {
        let l = 4.0;
        let f = sample_field(0.5, l, 16.0 * std::f64::consts::PI, 64, 5).unwrap();
        let dk = mode_spacing(f.torus_side);
        for m in &f.modes {
            let r = ((m.n1 as f64 * dk).powi(2) + (m.n2 as f64 * dk).powi(2)).sqrt();
            assert!(r >= 1.0 / l && r <= 1.0);
        }
    }

    #[test]
    fn cutoff_field_reuses_mode_noise() {
        // Shared (seed, mode) noise: the cut field's coefficients equal the
        // full field's on the common band.
        let full = small_field(0.5, 9);
        let cut = sample_field(0.5, 4.0, 16.0 * std::f64::consts::PI, 64, 9).unwrap();
        for m in &cut.modes {
            let twin = full
                .modes
                .iter()
                .find(|f| f.n1 == m.n1 && f.n2 == m.n2)
                .expect("mode in full band");
            assert_eq!(m.amp, twin.amp);
        }
    }

    #[test]
    fn stream_function_reconstructs_field() {
        let f = small_field(0.5, 4);
        let psi = stream_function(&f);
        let rec = psi.curl_modes();
        let dk = mode_spacing(f.torus_side);
        for (m, (n1, n2, b)) in f.modes.iter().zip(&rec) {
            assert_eq!((m.n1, m.n2), (*n1, *n2));
            let c = m.coeffs(dk);
            assert!((c[0] - b[0]).norm() < 1e-12);
            assert!((c[1] - b[1]).norm() < 1e-12);
            // |ψ̂| = |b̂|/|k| mode-wise.
            let k = ((m.n1 as f64 * dk).powi(2) + (m.n2 as f64 * dk).powi(2)).sqrt();
            let bnorm = (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
            let psi_norm = psi
                .modes
                .iter()
                .find(|p| p.0 == m.n1 && p.1 == m.n2)
                .unwrap()
                .2
                .norm();
            assert!((psi_norm - bnorm / k).abs() < 1e-12 * (1.0 + bnorm));
        }
    }

    #[test]
    fn zero_field_stream_function_is_zero() {
        let f = small_field(0.0, 4);
        let psi = stream_function(&f);
        assert!(psi.modes.iter().all(|p| p.2.norm() == 0.0));
        assert_eq!(f.divergence_residual(), 0.0);
    }

    #[test]
    fn coupling_starts_at_zero() {
        let f = small_field(0.5, 6);
        let path = coupled_b_path(&f, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(path.values[0], AlgebraVector::ZERO);
        // Values are exact band sums: nonzero once the band is populated.
        assert!(path.values[2].to_matrix().frobenius_sq() > 0.0);
    }

    #[test]
    fn coupling_rejects_unresolved_scales() {
        let f = small_field(0.5, 6);
        // dk = 1/8, so L beyond 8 is unresolved.
        assert!(coupled_b_path(&f, &[0.0, (9.0f64).ln()]).is_err());
    }

    #[test]
    fn circle_tensor_matches_canonical() {
        let ct = circle_tensor();
        let expect = [[0.25, 0.0, 0.0], [0.0, 0.25, 0.0], [0.0, 0.0, 0.5]];
        for r in 0..3 {
            for c in 0..3 {
                assert!(
                    (ct.coeff_cov[r][c] - expect[r][c]).abs() <= 1e-12,
                    "cov[{r}][{c}] = {}",
                    ct.coeff_cov[r][c]
                );
            }
        }
        assert!(ct.trace_component <= 1e-12);
        let half_id = Mat2::ID.scale(0.5);
        assert!(ct.k_outer_avg.sub(&half_id).frobenius_sq().sqrt() <= 1e-12);
    }

    #[test]
    fn postulates_hold_for_canonical_and_circle_measures() {
        let canonical = CovarianceSpec::canonical().rank_one_measure();
        let (r1, r2) = check_postulates(&canonical);
        assert!(r1 <= 1e-12 && r2 <= 1e-12, "canonical: {r1}, {r2}");
        let (r1, r2) = check_postulates(&circle_tensor().measure);
        assert!(r1 <= 1e-12 && r2 <= 1e-12, "circle: {r1}, {r2}");
    }

    #[test]
    fn postulates_fail_for_lopsided_measure() {
        // μ = δ_{E₁} breaks the first postulate: E₁² = id.
        let [e1, _, _] = crate::sl2::algebra_basis();
        let (r1, _) = check_postulates(&[(1.0, e1)]);
        assert!((r1 - 2.0f64.sqrt()).abs() < 1e-12);
    }
}
