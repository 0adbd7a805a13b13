//! Scale functions, the scale-by-scale proxy corrector, and the gradient
//! recursion it induces at the origin.
//!
//! The corrector is built by integrating, shell by shell in the cutoff
//! length `L`, the increment `dφ = λ̃⁻¹(−Δ)⁻¹ db` (with `λ̃` frozen at the
//! left endpoint of each shell — the Itô convention) together with the
//! two-scale update `dφ̃ = (1 + φ̃ⁱ∂ᵢ) dφ` and the matrix recursion
//! `dF = F ∇dφ(0)`.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::fft::{wrap_index, Fft2};
use crate::field::{mode_spacing, SpectralField};
use crate::sl2::{AlgebraVector, Mat2};

/// The scale functions `λ(s) = √(1 + (ε²/2) ln(1+s))` and `τ(s) = ln λ(s)`
/// for a fixed drift amplitude.
#[derive(Debug, Clone, Copy)]
pub struct ScaleMap {
    pub epsilon: f64,
}

impl ScaleMap {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }

    /// `λ(s) = √(1 + (ε²/2) ln(1+s))`, nondecreasing with `λ(0) = 1`.
    pub fn lambda_of(&self, s: f64) -> f64 {
        (1.0 + 0.5 * self.epsilon * self.epsilon * (1.0 + s).ln()).sqrt()
    }

    /// `τ(s) = ln λ(s)`.
    pub fn tau_of(&self, s: f64) -> f64 {
        self.lambda_of(s).ln()
    }

    /// The scale time of a cutoff length under the change of variables
    /// `e^τ = λ(L²−1)` (so `τ = ½ ln(1 + ε² ln L)`).
    pub fn tau_of_l(&self, l: f64) -> f64 {
        self.tau_of(l * l - 1.0)
    }

    /// Inverse of [`ScaleMap::tau_of_l`].
    pub fn l_of_tau(&self, tau: f64) -> f64 {
        if self.epsilon == 0.0 {
            return 1.0;
        }
        (((2.0 * tau).exp() - 1.0) / (self.epsilon * self.epsilon)).exp()
    }
}

/// The self-consistent homogenization schedule tied to a terminal time:
/// `L = √(T+1)` and `λ̃_L = λ(T)`.
pub fn tilde_lambda_schedule(t: f64, epsilon: f64) -> (f64, f64) {
    ((t + 1.0).sqrt(), ScaleMap::new(epsilon).lambda_of(t))
}

/// Entry scale of a mode: the lnL at which `|k| ≥ 1/L` starts holding.
/// Modes on the outer cutoff ring are assigned the smallest positive value
/// so that the decomposition at L = 1 is empty.
#[inline]
fn entry_lnl(k2: f64) -> f64 {
    let e = -0.5 * k2.ln();
    if e <= 0.0 {
        f64::MIN_POSITIVE
    } else {
        e
    }
}

/// Mode indices of a field with entry scale in `(lnl_left, lnl_right]`.
pub fn shell_modes(field: &SpectralField, lnl_left: f64, lnl_right: f64) -> Vec<usize> {
    let dk = mode_spacing(field.torus_side);
    field
        .modes
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let k2 = (m.n1 as f64 * m.n1 as f64 + m.n2 as f64 * m.n2 as f64) * dk * dk;
            let e = entry_lnl(k2);
            (e > lnl_left && e <= lnl_right).then_some(i)
        })
        .collect()
}

/// Partition the retained modes of a field into the shells of a lnL grid:
/// `bins[j]` lists mode indices with entry scale in `(lnl[j], lnl[j+1]]`.
pub fn shell_bins(field: &SpectralField, lnl_grid: &[f64]) -> Result<Vec<Vec<usize>>> {
    if lnl_grid.len() < 2 || lnl_grid[0] != 0.0 || lnl_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidParameter(
            "lnL grid must start at 0 and increase strictly".into(),
        ));
    }
    let dk = mode_spacing(field.torus_side);
    let mut bins = vec![Vec::new(); lnl_grid.len() - 1];
    for (idx, m) in field.modes.iter().enumerate() {
        let k2 = (m.n1 as f64 * m.n1 as f64 + m.n2 as f64 * m.n2 as f64) * dk * dk;
        let entry = entry_lnl(k2);
        let j = lnl_grid.partition_point(|&l| l < entry);
        if j == 0 || j >= lnl_grid.len() {
            continue;
        }
        bins[j - 1].push(idx);
    }
    Ok(bins)
}

/// Per-shell jet of the corrector increment at the origin: the value
/// `dφ(0)`, the gradient `∂ᵢdφ^j(0)`, and the Hessian `∂ᵢ∂ₗdφ^j(0)`,
/// computed as exact mode sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShellJet {
    pub value: [f64; 2],
    /// `grad.0[2i + j] = ∂ᵢ dφ^j (0)`.
    pub grad: Mat2,
    /// `hess[j] = [∂₁∂₁, ∂₁∂₂, ∂₂∂₂] dφ^j (0)`.
    pub hess: [[f64; 3]; 2],
}

/// Accumulate the origin jet of `dφ = λ̃⁻¹(−Δ)⁻¹ db` over one shell.
pub fn shell_jet(field: &SpectralField, mode_indices: &[usize], lambda_tilde: f64) -> ShellJet {
    let dk = mode_spacing(field.torus_side);
    let mut jet = ShellJet::default();
    for &idx in mode_indices {
        let m = &field.modes[idx];
        let k = [m.n1 as f64 * dk, m.n2 as f64 * dk];
        let k2 = k[0] * k[0] + k[1] * k[1];
        let denom = lambda_tilde * k2;
        let c = m.coeffs(dk);
        for j in 0..2 {
            let dphi = c[j] / denom;
            // Mode plus conjugate partner evaluated at the origin.
            jet.value[j] += 2.0 * dphi.re;
            jet.grad.0[j] -= 2.0 * k[0] * dphi.im;
            jet.grad.0[2 + j] -= 2.0 * k[1] * dphi.im;
            jet.hess[j][0] -= 2.0 * k[0] * k[0] * dphi.re;
            jet.hess[j][1] -= 2.0 * k[0] * k[1] * dphi.re;
            jet.hess[j][2] -= 2.0 * k[1] * k[1] * dphi.re;
        }
    }
    jet
}

/// Origin-jet integration of the corrector recursions: tracks the matrix
/// flow `dF = F ∇dφ(0)` together with `φ̃(0)`, `∇φ̃(0)` and the driver sum.
/// This is the light-weight path for large ensembles; the full-field
/// [`CorrectorState`] is the reference implementation.
#[derive(Debug, Clone)]
pub struct GradientFlow {
    pub l: f64,
    pub f_matrix: Mat2,
    /// `φ̃(0)` (torus-mean correction not applied on the jet path).
    pub tilde_value: [f64; 2],
    /// `∂ᵢφ̃^j(0)` in the same layout as [`ShellJet::grad`].
    pub tilde_grad: Mat2,
    /// Scaled driver `Σ (√2 λ̃/ε) ∇dφ(0)` in basis coefficients; per unit
    /// lnL its covariance is the canonical diag(1/4, 1/4, 1/2).
    pub scaled_driver: AlgebraVector,
    scale: ScaleMap,
}

impl GradientFlow {
    pub fn new(epsilon: f64) -> Self {
        Self {
            l: 1.0,
            f_matrix: Mat2::ID,
            tilde_value: [0.0; 2],
            tilde_grad: Mat2::ZERO,
            scaled_driver: AlgebraVector::ZERO,
            scale: ScaleMap::new(epsilon),
        }
    }

    /// Advance over one shell with the given mode set.
    pub fn advance(&mut self, field: &SpectralField, mode_indices: &[usize], l_next: f64) {
        let lambda_tilde = self.scale.lambda_of(self.l * self.l - 1.0);
        let jet = shell_jet(field, mode_indices, lambda_tilde);
        let d = jet.grad;
        // dF = F ∇dφ(0)
        self.f_matrix = self.f_matrix.add(&self.f_matrix.mul(&d));
        // d∇φ̃ = ∇dφ + (∇φ̃)(∇dφ) + φ̃ˡ ∂ₗ∇dφ, all at the origin, with the
        // pre-shell state on the right (Itô convention).
        let g = self.tilde_grad;
        let y = self.tilde_value;
        let mut dg = d;
        dg = dg.add(&g.mul(&d));
        for j in 0..2 {
            dg.0[j] += y[0] * jet.hess[j][0] + y[1] * jet.hess[j][1];
            dg.0[2 + j] += y[0] * jet.hess[j][1] + y[1] * jet.hess[j][2];
        }
        self.tilde_grad = g.add(&dg);
        // dφ̃(0) = dφ(0) + φ̃ⁱ(0) ∂ᵢdφ(0)
        for j in 0..2 {
            self.tilde_value[j] += jet.value[j] + y[0] * d.0[j] + y[1] * d.0[2 + j];
        }
        if field.epsilon > 0.0 {
            let s = std::f64::consts::SQRT_2 * lambda_tilde / field.epsilon;
            self.scaled_driver = self
                .scaled_driver
                .add(&AlgebraVector::from_matrix(&d.scale(s)));
        }
        self.l = l_next;
    }

    /// `∇ũ_L(0) = id + ∇φ̃_L(0)` on the jet path.
    pub fn proxy_gradient(&self) -> Mat2 {
        Mat2::ID.add(&self.tilde_grad)
    }
}

/// Full-field state of the scale-by-scale corrector on the field's grid.
pub struct CorrectorState {
    pub l: f64,
    /// Log-scale of `l`, tracked separately so shell boundaries are not
    /// re-derived through exp/ln round trips.
    lnl: f64,
    /// Accumulated `φ` on the real grid, one vector per component.
    pub phi: [Vec<f64>; 2],
    /// Accumulated proxy corrector `φ̃` on the real grid.
    pub phi_tilde: [Vec<f64>; 2],
    /// The matrix recursion driven by `∇dφ(0)`; determinant not
    /// renormalized (drift reported by [`CorrectorState::det_drift`]).
    pub f_matrix: Mat2,
    grid_n: usize,
    torus_side: f64,
    epsilon: f64,
    fft: Fft2,
}

impl CorrectorState {
    /// Fresh state at L = 1 on the grid of the given field realization.
    pub fn new(field: &SpectralField) -> Self {
        let n = field.grid_n;
        Self {
            l: 1.0,
            lnl: 0.0,
            phi: [vec![0.0; n * n], vec![0.0; n * n]],
            phi_tilde: [vec![0.0; n * n], vec![0.0; n * n]],
            f_matrix: Mat2::ID,
            grid_n: n,
            torus_side: field.torus_side,
            epsilon: field.epsilon,
            fft: Fft2::new(n),
        }
    }

    /// Current log-scale (left endpoint of the next shell).
    pub fn lnl(&self) -> f64 {
        self.lnl
    }

    /// Deviation of `det F_L` from 1 (the recursion is not projected onto
    /// the group; this is a diagnostic of the accumulated drift).
    pub fn det_drift(&self) -> f64 {
        self.f_matrix.det() - 1.0
    }

    pub fn grid_mean(values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / values.len() as f64
    }

    fn synthesize_shell(
        &self,
        field: &SpectralField,
        mode_indices: &[usize],
        lambda_tilde: f64,
        comp: usize,
        derivative: Option<usize>,
    ) -> Vec<f64> {
        let n = self.grid_n;
        let dk = mode_spacing(self.torus_side);
        let mut grid = vec![Complex64::default(); n * n];
        for &idx in mode_indices {
            let m = &field.modes[idx];
            let k = [m.n1 as f64 * dk, m.n2 as f64 * dk];
            let k2 = k[0] * k[0] + k[1] * k[1];
            let mut coeff = m.coeffs(dk)[comp] / (lambda_tilde * k2);
            if let Some(axis) = derivative {
                coeff *= Complex64::new(0.0, k[axis]);
            }
            let i1 = wrap_index(m.n1 as i64, n);
            let i2 = wrap_index(m.n2 as i64, n);
            grid[i1 * n + i2] = coeff;
            let j1 = wrap_index(-m.n1 as i64, n);
            let j2 = wrap_index(-m.n2 as i64, n);
            grid[j1 * n + j2] = coeff.conj();
        }
        self.fft.synthesize(&mut grid);
        grid.iter().map(|z| z.re).collect()
    }

    /// Advance the state over the shell `(L, L_next]` of the field.
    ///
    /// The shell increment is `dφ = λ̃⁻¹(−Δ)⁻¹ db` with `λ̃ = λ(L²−1)` at
    /// the left endpoint; `φ̃` receives `(1 + φ̃ⁱ∂ᵢ) dφ` with its torus
    /// mean removed (the k = 0 mode is excluded by construction), and the
    /// matrix state receives `F ∇dφ(0)`.
    pub fn advance(&mut self, field: &SpectralField, l_next: f64) -> Result<()> {
        if l_next <= self.l {
            return Err(CoreError::InvalidParameter(format!(
                "advance needs L_next > L, got {} <= {}",
                l_next, self.l
            )));
        }
        let lnl_right = l_next.ln();
        let shell = shell_modes(field, self.lnl, lnl_right);
        if shell.is_empty() {
            return Err(CoreError::EmptyShell {
                l_left: self.l,
                l_right: l_next,
            });
        }
        let lambda_tilde = ScaleMap::new(self.epsilon).lambda_of(self.l * self.l - 1.0);
        // Matrix recursion from the origin gradient.
        let jet = shell_jet(field, &shell, lambda_tilde);
        self.f_matrix = self.f_matrix.add(&self.f_matrix.mul(&jet.grad));
        // Field updates: both components read the pre-shell φ̃ (the Itô
        // convention), so stage the increments before applying them.
        let n2 = self.grid_n * self.grid_n;
        let mut staged: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for j in 0..2 {
            let dphi = self.synthesize_shell(field, &shell, lambda_tilde, j, None);
            let d1 = self.synthesize_shell(field, &shell, lambda_tilde, j, Some(0));
            let d2 = self.synthesize_shell(field, &shell, lambda_tilde, j, Some(1));
            let mut dtilde = vec![0.0; n2];
            for c in 0..n2 {
                dtilde[c] = dphi[c] + self.phi_tilde[0][c] * d1[c] + self.phi_tilde[1][c] * d2[c];
            }
            let mean = Self::grid_mean(&dtilde);
            for c in 0..n2 {
                dtilde[c] -= mean;
                self.phi[j][c] += dphi[c];
            }
            staged[j] = dtilde;
        }
        for j in 0..2 {
            for c in 0..n2 {
                self.phi_tilde[j][c] += staged[j][c];
            }
        }
        self.l = l_next;
        self.lnl = lnl_right;
        Ok(())
    }

    /// `∇ũ_L(0) = id + ∇φ̃_L(0)` by spectral differentiation of the
    /// accumulated proxy corrector.
    pub fn proxy_gradient_at_zero(&self) -> Mat2 {
        let n = self.grid_n;
        let dk = mode_spacing(self.torus_side);
        let mut grad = Mat2::ID;
        for j in 0..2 {
            let mut spec: Vec<Complex64> = self.phi_tilde[j]
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            self.fft.analyze(&mut spec);
            let mut g = [0.0f64; 2];
            for i1 in 0..n {
                let k1 = crate::fft::signed_index(i1, n) as f64 * dk;
                for i2 in 0..n {
                    let k2 = crate::fft::signed_index(i2, n) as f64 * dk;
                    let c = spec[i1 * n + i2];
                    // Real part of i k ĉ summed over all modes.
                    g[0] -= k1 * c.im;
                    g[1] -= k2 * c.im;
                }
            }
            grad.0[j] += g[0];
            grad.0[2 + j] += g[1];
        }
        grad
    }

    /// Value of `φ̃` at a grid point.
    pub fn tilde_at(&self, i1: usize, i2: usize) -> [f64; 2] {
        let n = self.grid_n;
        [
            self.phi_tilde[0][i1 * n + i2],
            self.phi_tilde[1][i1 * n + i2],
        ]
    }
}

/// Geometric lnL grid with a fixed shell count per e-fold, from L = 1 up
/// to `l_max`.
pub fn lnl_grid(l_max: f64, shells_per_efold: usize) -> Vec<f64> {
    let total = (l_max.ln() * shells_per_efold as f64).ceil().max(1.0) as usize;
    let step = l_max.ln() / total as f64;
    (0..=total).map(|j| j as f64 * step).collect()
}
