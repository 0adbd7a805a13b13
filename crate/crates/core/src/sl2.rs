//! The canonical diffusion `F` on SL(2).
//!
//! The driving noise `B` lives on the trace-free 2×2 matrices and is
//! sampled in the orthogonal basis `E₁, E₂, E₃` where its covariance is
//! diagonal; the canonical parameters are `κ_sym = 1/4`, `κ_skew = 1/2`.
//! The Itô evolution `dF = F dB` is integrated by forward Euler followed
//! by exact determinant renormalization, which keeps every path state on
//! the group to rounding accuracy.

use rand::RngCore;

use crate::error::{CoreError, Result};
use crate::rng::{normal_pair, CellRng};

/// Plain 2×2 real matrix, row-major `[e11, e12, e21, e22]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2(pub [f64; 4]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([0.0; 4]);
    pub const ID: Mat2 = Mat2([1.0, 0.0, 0.0, 1.0]);

    #[inline]
    pub fn det(&self) -> f64 {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[3]
    }

    /// Squared Frobenius norm (sum of squared entries).
    #[inline]
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|e| e * e).sum()
    }

    #[inline]
    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    #[inline]
    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        Mat2([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }

    #[inline]
    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        Mat2([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
            self.0[3] - rhs.0[3],
        ])
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    #[inline]
    pub fn transpose(&self) -> Mat2 {
        Mat2([self.0[0], self.0[2], self.0[1], self.0[3]])
    }

    /// Apply to a column vector.
    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0] * v[0] + self.0[1] * v[1],
            self.0[2] * v[0] + self.0[3] * v[1],
        ]
    }

    /// Apply the transpose to a column vector.
    #[inline]
    pub fn apply_transposed(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0] * v[0] + self.0[2] * v[1],
            self.0[1] * v[0] + self.0[3] * v[1],
        ]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.0[1] - self.0[2]).abs() <= tol * (1.0 + self.frobenius_sq().sqrt())
    }
}

/// The trace-free basis: `E₁ = diag(1,-1)`, `E₂` the off-diagonal
/// reflection, `E₃` the rotation by π/2.
pub fn algebra_basis() -> [Mat2; 3] {
    [
        Mat2([1.0, 0.0, 0.0, -1.0]),
        Mat2([0.0, 1.0, 1.0, 0.0]),
        Mat2([0.0, -1.0, 1.0, 0.0]),
    ]
}

/// Coefficients of a trace-free matrix in the basis `E₁, E₂, E₃`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgebraVector {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl AlgebraVector {
    pub const ZERO: AlgebraVector = AlgebraVector {
        a1: 0.0,
        a2: 0.0,
        a3: 0.0,
    };

    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self { a1, a2, a3 }
    }

    /// Reconstruct `a₁E₁ + a₂E₂ + a₃E₃`; trace-free by construction.
    #[inline]
    pub fn to_matrix(&self) -> Mat2 {
        Mat2([self.a1, self.a2 - self.a3, self.a2 + self.a3, -self.a1])
    }

    /// Project a matrix onto the basis coefficients (the trace part is
    /// dropped; callers pass trace-free matrices).
    #[inline]
    pub fn from_matrix(m: &Mat2) -> Self {
        Self {
            a1: 0.5 * (m.0[0] - m.0[3]),
            a2: 0.5 * (m.0[1] + m.0[2]),
            a3: 0.5 * (m.0[2] - m.0[1]),
        }
    }

    pub fn add(&self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.a1 + rhs.a1, self.a2 + rhs.a2, self.a3 + rhs.a3)
    }

    pub fn sub(&self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.a1 - rhs.a1, self.a2 - rhs.a2, self.a3 - rhs.a3)
    }

    pub fn scale(&self, s: f64) -> AlgebraVector {
        AlgebraVector::new(self.a1 * s, self.a2 * s, self.a3 * s)
    }
}

/// Covariance of the algebra-valued Brownian motion per unit time.
///
/// In the `E₁, E₂, E₃` basis the invariant covariance is diagonal with
/// entries `(κ_sym, κ_sym, κ_skew)`. The optional `measure` carries a
/// general rank-one decomposition `Σ wᵢ Eᵢ ⊗ Eᵢ` used by the postulate
/// checks.
#[derive(Debug, Clone)]
pub struct CovarianceSpec {
    pub kappa_sym: f64,
    pub kappa_skew: f64,
    pub measure: Option<Vec<(f64, Mat2)>>,
}

impl CovarianceSpec {
    /// The canonical parameters `2κ_skew = 4κ_sym = 1`.
    pub fn canonical() -> Self {
        Self {
            kappa_sym: 0.25,
            kappa_skew: 0.5,
            measure: None,
        }
    }

    pub fn with_kappas(kappa_sym: f64, kappa_skew: f64) -> Result<Self> {
        if kappa_sym < 0.0 || kappa_skew < 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "negative covariance parameters: kappa_sym={kappa_sym}, kappa_skew={kappa_skew}"
            )));
        }
        Ok(Self {
            kappa_sym,
            kappa_skew,
            measure: None,
        })
    }

    /// The rank-one decomposition of the covariance: the explicit measure
    /// when present, otherwise `κ_sym(δ_{E₁}+δ_{E₂}) + κ_skew δ_{E₃}`.
    pub fn rank_one_measure(&self) -> Vec<(f64, Mat2)> {
        if let Some(m) = &self.measure {
            return m.clone();
        }
        let [e1, e2, e3] = algebra_basis();
        vec![
            (self.kappa_sym, e1),
            (self.kappa_sym, e2),
            (self.kappa_skew, e3),
        ]
    }

    /// Total variance `Σ wᵢ` of the decomposition; for a valid measure it
    /// equals `2κ_sym + κ_skew`.
    pub fn total_weight(&self) -> f64 {
        self.rank_one_measure().iter().map(|(w, _)| w).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa_sym < 0.0 || self.kappa_skew < 0.0 {
            return Err(CoreError::InvalidParameter(
                "negative covariance parameters".into(),
            ));
        }
        if let Some(m) = &self.measure {
            if m.iter().any(|(w, _)| *w < 0.0) {
                return Err(CoreError::InvalidParameter(
                    "negative weight in covariance measure".into(),
                ));
            }
            let sum: f64 = m.iter().map(|(w, _)| w).sum();
            let expect = 2.0 * self.kappa_sym + self.kappa_skew;
            if (sum - expect).abs() > 1e-12 * (1.0 + expect) {
                return Err(CoreError::InvalidParameter(format!(
                    "measure weights sum to {sum}, expected {expect}"
                )));
            }
        }
        Ok(())
    }
}

#[inline]
fn draw_increment<R: RngCore>(sigma_sym: f64, sigma_skew: f64, rng: &mut R) -> AlgebraVector {
    // Fixed consumption: two Box-Muller pairs, fourth normal discarded.
    let (g1, g2) = normal_pair(rng);
    let (g3, _) = normal_pair(rng);
    AlgebraVector::new(sigma_sym * g1, sigma_sym * g2, sigma_skew * g3)
}

/// Sample one Brownian increment of the algebra-valued driver over a time
/// interval `d_tau`: a centered Gaussian with coefficient variances
/// `(κ_sym dτ, κ_sym dτ, κ_skew dτ)`.
pub fn sample_increment<R: RngCore>(
    d_tau: f64,
    cov: &CovarianceSpec,
    rng: &mut R,
) -> Result<AlgebraVector> {
    if !(d_tau > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "sample_increment needs d_tau > 0, got {d_tau}"
        )));
    }
    cov.validate()?;
    Ok(draw_increment(
        (cov.kappa_sym * d_tau).sqrt(),
        (cov.kappa_skew * d_tau).sqrt(),
        rng,
    ))
}

/// A matrix constrained to determinant one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2Matrix(Mat2);

impl Sl2Matrix {
    pub const ID: Sl2Matrix = Sl2Matrix(Mat2::ID);

    /// Wrap a matrix that is already on the group.
    pub fn from_checked(m: Mat2) -> Result<Self> {
        if (m.det() - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidParameter(format!(
                "matrix has determinant {}, not 1",
                m.det()
            )));
        }
        Ok(Self(m))
    }

    /// Project a matrix of positive determinant onto the group by dividing
    /// by the square root of its determinant.
    pub fn renormalize(m: Mat2) -> Result<Self> {
        let d = m.det();
        if d <= 0.0 {
            return Err(CoreError::StepFailed {
                tau: f64::NAN,
                det: d,
            });
        }
        Ok(Self(m.scale(1.0 / d.sqrt())))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.det()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.frobenius_sq()
    }
}

/// Half the squared Frobenius norm, `R = |F|²/2 ≥ 1` on the group.
pub fn frobenius_r(f: &Sl2Matrix) -> f64 {
    0.5 * f.frobenius_sq()
}

/// One forward-Euler step of `dF = F dB` with exact determinant
/// renormalization. Fails when `det(F + F dB) ≤ 0`, i.e. when the sampled
/// increment is too large for the step size.
pub fn step_ito(f: &Sl2Matrix, db: &AlgebraVector) -> Result<Sl2Matrix> {
    let m = f.matrix();
    let incr = m.mul(&db.to_matrix());
    Sl2Matrix::renormalize(m.add(&incr))
}

/// Residual of the trace identity
/// `(tr GE₁)² + (tr GE₂)² = (tr G)² − 4 det G` for symmetric `G`.
pub fn check_trace_identity(g: &Mat2) -> Result<f64> {
    if !g.is_symmetric(1e-12) {
        return Err(CoreError::InvalidParameter(
            "check_trace_identity needs a symmetric matrix".into(),
        ));
    }
    let [e1, e2, _] = algebra_basis();
    let t1 = g.mul(&e1).trace();
    let t2 = g.mul(&e2).trace();
    let lhs = t1 * t1 + t2 * t2;
    let rhs = g.trace() * g.trace() - 4.0 * g.det();
    Ok(lhs - rhs)
}

/// A sampled trajectory of the matrix diffusion on a uniform τ-grid.
#[derive(Debug, Clone)]
pub struct MatrixPath {
    pub tau_grid: Vec<f64>,
    pub states: Vec<Sl2Matrix>,
    pub seed: u64,
}

/// In-place stepper for the matrix diffusion, indexed by global noise
/// cells of width `dt` so that flows with different starting times but the
/// same `(master_seed, stream)` reuse identical increments on overlapping
/// cells.
pub struct Sl2Walker {
    state: Sl2Matrix,
    cell: u64,
    dt: f64,
    sigma_sym: f64,
    sigma_skew: f64,
    rng: CellRng,
}

impl Sl2Walker {
    pub fn new(
        dt: f64,
        cov: &CovarianceSpec,
        master_seed: u64,
        stream: u64,
        start_cell: u64,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        cov.validate()?;
        Ok(Self {
            state: Sl2Matrix::ID,
            cell: start_cell,
            dt,
            sigma_sym: (cov.kappa_sym * dt).sqrt(),
            sigma_skew: (cov.kappa_skew * dt).sqrt(),
            rng: CellRng::new(master_seed, stream),
        })
    }

    pub fn state(&self) -> &Sl2Matrix {
        &self.state
    }

    pub fn cell(&self) -> u64 {
        self.cell
    }

    pub fn tau(&self) -> f64 {
        self.cell as f64 * self.dt
    }

    /// Advance by one cell.
    #[inline]
    pub fn step(&mut self) -> Result<()> {
        let (g1, g2, g3) = self.rng.normals3(self.cell);
        let db = AlgebraVector::new(
            self.sigma_sym * g1,
            self.sigma_sym * g2,
            self.sigma_skew * g3,
        );
        match step_ito(&self.state, &db) {
            Ok(next) => {
                self.state = next;
                self.cell += 1;
                Ok(())
            }
            Err(CoreError::StepFailed { det, .. }) => Err(CoreError::StepFailed {
                tau: self.tau(),
                det,
            }),
            Err(e) => Err(e),
        }
    }

    /// Advance until `cell` (exclusive of further steps).
    pub fn advance_to_cell(&mut self, cell: u64) -> Result<()> {
        while self.cell < cell {
            self.step()?;
        }
        Ok(())
    }
}

fn nearest_cell(tau: f64, dt: f64) -> u64 {
    (tau / dt).round().max(0.0) as u64
}

/// Simulate `F` on the uniform grid of width `dt` from `tau_start` to
/// `tau_end`, started at the identity. If `tau_end ≤ tau_start` the path is
/// the single identity state (the extension convention).
///
/// Times are snapped to the global cell grid `{j·dt}`; the reported grid
/// carries the snapped values.
pub fn simulate_f(
    tau_start: f64,
    tau_end: f64,
    dt: f64,
    cov: &CovarianceSpec,
    master_seed: u64,
    stream: u64,
) -> Result<MatrixPath> {
    if tau_start < 0.0 || tau_end < 0.0 {
        return Err(CoreError::InvalidParameter(
            "simulate_f needs nonnegative times".into(),
        ));
    }
    let j0 = nearest_cell(tau_start, dt);
    let j1 = nearest_cell(tau_end, dt);
    let mut walker = Sl2Walker::new(dt, cov, master_seed, stream, j0)?;
    let mut tau_grid = vec![j0 as f64 * dt];
    let mut states = vec![*walker.state()];
    for j in j0..j1 {
        walker.step()?;
        tau_grid.push((j + 1) as f64 * dt);
        states.push(*walker.state());
    }
    Ok(MatrixPath {
        tau_grid,
        states,
        seed: master_seed,
    })
}

/// The two-point flow `F_{τ*,τ}`: identity for `τ ≤ τ*`, otherwise the
/// terminal state of the flow started at the identity at `τ*`. Flows that
/// share `(master_seed, stream)` are driven by the same increments on
/// overlapping cells.
pub fn two_point_f(
    tau_star: f64,
    tau: f64,
    dt: f64,
    cov: &CovarianceSpec,
    master_seed: u64,
    stream: u64,
) -> Result<Sl2Matrix> {
    if tau_star < 0.0 || tau < 0.0 {
        return Err(CoreError::InvalidParameter(
            "two_point_f needs nonnegative times".into(),
        ));
    }
    if tau <= tau_star {
        return Ok(Sl2Matrix::ID);
    }
    let path = simulate_f(tau_star, tau, dt, cov, master_seed, stream)?;
    Ok(*path.states.last().expect("nonempty path"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_matches_definition() {
        let [e1, e2, e3] = algebra_basis();
        assert_eq!(e1, Mat2([1.0, 0.0, 0.0, -1.0]));
        assert_eq!(e2, Mat2([0.0, 1.0, 1.0, 0.0]));
        assert_eq!(e3, Mat2([0.0, -1.0, 1.0, 0.0]));
        for e in [e1, e2, e3] {
            assert_eq!(e.trace(), 0.0);
        }
        // E₁² = E₂² = id, E₃² = −id.
        assert_eq!(e1.mul(&e1), Mat2::ID);
        assert_eq!(e2.mul(&e2), Mat2::ID);
        assert_eq!(e3.mul(&e3), Mat2::ID.scale(-1.0));
    }

    #[test]
    fn algebra_vector_round_trip() {
        let v = AlgebraVector::new(0.3, -1.2, 2.5);
        let m = v.to_matrix();
        assert_eq!(m.trace(), 0.0);
        let back = AlgebraVector::from_matrix(&m);
        assert!((back.a1 - v.a1).abs() < 1e-15);
        assert!((back.a2 - v.a2).abs() < 1e-15);
        assert!((back.a3 - v.a3).abs() < 1e-15);
    }

    #[test]
    fn zero_increment_is_identity() {
        let f = step_ito(&Sl2Matrix::ID, &AlgebraVector::ZERO).unwrap();
        assert_eq!(f, Sl2Matrix::ID);
    }

    #[test]
    fn diagonal_increment_renormalizes() {
        let h = 0.25;
        let f = step_ito(&Sl2Matrix::ID, &AlgebraVector::new(h, 0.0, 0.0)).unwrap();
        let s = (1.0 - h * h).sqrt();
        let m = f.matrix();
        assert!((m.0[0] - (1.0 + h) / s).abs() < 1e-15);
        assert!((m.0[3] - (1.0 - h) / s).abs() < 1e-15);
        assert!((f.det() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn oversized_step_fails() {
        // dB = 2·E₁ gives det(id + dB) = (1+2)(1-2) = -3 < 0.
        let err = step_ito(&Sl2Matrix::ID, &AlgebraVector::new(2.0, 0.0, 0.0));
        assert!(matches!(err, Err(CoreError::StepFailed { .. })));
    }

    #[test]
    fn increment_rejects_bad_parameters() {
        let mut rng = crate::rng::seed_stream(1, 0);
        let cov = CovarianceSpec::canonical();
        assert!(sample_increment(0.0, &cov, &mut rng).is_err());
        assert!(sample_increment(-1.0, &cov, &mut rng).is_err());
        assert!(CovarianceSpec::with_kappas(-0.1, 0.5).is_err());
    }

    #[test]
    fn empty_interval_is_single_identity() {
        let cov = CovarianceSpec::canonical();
        let p = simulate_f(1.0, 1.0, 1e-3, &cov, 3, 0).unwrap();
        assert_eq!(p.states.len(), 1);
        assert_eq!(p.states[0], Sl2Matrix::ID);
        let p = simulate_f(1.0, 0.5, 1e-3, &cov, 3, 0).unwrap();
        assert_eq!(p.states.len(), 1);
    }

    #[test]
    fn frobenius_observable() {
        assert_eq!(frobenius_r(&Sl2Matrix::ID), 1.0);
        let f = Sl2Matrix::from_checked(Mat2([2.0, 0.0, 0.0, 0.5])).unwrap();
        assert!((frobenius_r(&f) - 17.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn trace_identity_examples() {
        let [e1, _, _] = algebra_basis();
        assert_eq!(check_trace_identity(&Mat2::ID).unwrap(), 0.0);
        assert_eq!(check_trace_identity(&e1).unwrap(), 0.0);
        let g = Mat2([2.0, 0.0, 0.0, 1.0]);
        assert_eq!(check_trace_identity(&g).unwrap(), 0.0);
        let skew = Mat2([0.0, 1.0, -1.0, 0.0]);
        assert!(check_trace_identity(&skew).is_err());
    }

    #[test]
    fn two_point_extension_convention() {
        let cov = CovarianceSpec::canonical();
        assert_eq!(
            two_point_f(2.0, 1.0, 1e-3, &cov, 3, 1).unwrap(),
            Sl2Matrix::ID
        );
        assert_eq!(
            two_point_f(0.0, 0.0, 1e-3, &cov, 3, 1).unwrap(),
            Sl2Matrix::ID
        );
    }

    #[test]
    fn determinant_and_lower_bound_along_path() {
        let cov = CovarianceSpec::canonical();
        let p = simulate_f(0.0, 0.5, 1e-3, &cov, 17, 4).unwrap();
        for f in &p.states {
            assert!((f.det() - 1.0).abs() <= 1e-12);
            assert!(frobenius_r(f) >= 1.0);
        }
        assert!(frobenius_r(p.states.last().unwrap()) > 1.0);
    }

    #[test]
    fn path_grid_is_strictly_increasing_from_initial_state() {
        let cov = CovarianceSpec::canonical();
        let p = simulate_f(0.25, 0.75, 1e-3, &cov, 9, 0).unwrap();
        assert_eq!(p.states[0], Sl2Matrix::ID);
        assert!(p.tau_grid.windows(2).all(|w| w[1] > w[0]));
        assert!((p.tau_grid[0] - 0.25).abs() < 1e-12);
        assert_eq!(p.tau_grid.len(), p.states.len());
    }

    #[test]
    fn walker_matches_simulate_f() {
        let cov = CovarianceSpec::canonical();
        let p = simulate_f(0.0, 0.2, 1e-3, &cov, 23, 7).unwrap();
        let mut w = Sl2Walker::new(1e-3, &cov, 23, 7, 0).unwrap();
        w.advance_to_cell(200).unwrap();
        assert_eq!(w.state(), p.states.last().unwrap());
    }

    #[test]
    fn shared_cells_couple_flows() {
        // Two flows with the same stream use identical noise on the
        // overlap: on [0.1, 0.2] the flow started at 0.1 must equal
        // F_{0,0.1}⁻¹ F_{0,0.2} up to renormalization ordering; we check
        // the weaker exact property that increments per cell agree by
        // restarting a walker mid-stream.
        let cov = CovarianceSpec::canonical();
        let mut w1 = Sl2Walker::new(1e-3, &cov, 5, 2, 0).unwrap();
        w1.advance_to_cell(100).unwrap();
        let mut w2 = Sl2Walker::new(1e-3, &cov, 5, 2, 100).unwrap();
        // Same cells from 100 on: identical increments means the relative
        // flow of w1 equals w2's flow.
        let before = *w1.state();
        w1.advance_to_cell(150).unwrap();
        w2.advance_to_cell(150).unwrap();
        // w1.state ≈ before · w2.state when both use the same increments;
        // renormalization acts scalar per step so the relation is exact.
        let recomposed = before.matrix().mul(w2.state().matrix());
        let diff = recomposed.sub(w1.state().matrix());
        assert!(diff.frobenius_sq().sqrt() < 1e-12);
    }
}
