//! Thin 2D transform layer over `rustfft` with the synthesis convention
//! `f(x_j) = Σ_k f̂(k) e^{+i k·x_j}` (inverse transform unnormalized,
//! forward transform carries the 1/N² factor).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned transforms for an N×N grid.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn transpose(&self, data: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                data.swap(i * n + j, j * n + i);
            }
        }
    }

    fn rows(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for row in data.chunks_exact_mut(self.n) {
            plan.process_with_scratch(row, &mut scratch);
        }
    }

    /// Synthesis: spectral coefficients (row-major, DFT index order) to
    /// grid values, in place.
    pub fn synthesize(&self, data: &mut [Complex64]) {
        self.rows(&self.inv.clone(), data);
        self.transpose(data);
        self.rows(&self.inv.clone(), data);
        self.transpose(data);
    }

    /// Analysis: grid values to spectral coefficients (includes the 1/N²
    /// normalization), in place.
    pub fn analyze(&self, data: &mut [Complex64]) {
        self.rows(&self.fwd.clone(), data);
        self.transpose(data);
        self.rows(&self.fwd.clone(), data);
        self.transpose(data);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Signed frequency index of DFT bin `i` on a length-`n` axis.
#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// DFT bin of a signed frequency index.
#[inline]
pub fn wrap_index(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}
