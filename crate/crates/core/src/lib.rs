//! Simulation and verification toolkit for a critical two-dimensional
//! drift-diffusion problem and its companion diffusion on the matrix group
//! SL(2).
//!
//! The crate is organized around five subsystems:
//!
//! * [`sl2`] — the canonical matrix diffusion `F` on SL(2): algebra basis,
//!   canonical noise covariance, determinant-preserving Itô stepping, the
//!   Frobenius observable `R = |F|²/2`, and two-point flows.
//! * [`scalar`] — the one-dimensional companions: the Bessel-type process
//!   `R`, geometric Brownian motion `S`, the planar Bessel process `X`,
//!   the `exp∘arccosh` transform between them, and intermittency
//!   statistics (moments, mass concentration).
//! * [`field`] — divergence-free Gaussian velocity fields sampled
//!   spectrally on a periodic torus, band cutoffs, and the explicit
//!   algebra-valued coupling process built from the field at the origin.
//! * [`corrector`] — the scale functions `λ(s)`, `τ(s)`, the scale-by-scale
//!   proxy corrector and its gradient recursion.
//! * [`drift`] — particle paths in a frozen velocity field and the
//!   pseudo-spectral solver for the corrector-form advection-diffusion
//!   equation, plus increment statistics and residual diagnostics.
//!
//! [`stats`] and [`rng`] provide the deterministic Monte Carlo plumbing
//! (streaming moments, Kolmogorov–Smirnov tests, counter-based random
//! number streams) shared by all subsystems and by the CLI harness.

pub mod corrector;
pub mod drift;
pub mod error;
pub mod fft;
pub mod field;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod sl2;
pub mod stats;

pub use error::{CoreError, Result};
