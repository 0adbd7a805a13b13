//! Streaming statistics, Kolmogorov–Smirnov tests, and the deterministic
//! parallel execution helpers used by every Monte Carlo driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Welford single-pass mean and variance accumulator.
#[derive(Debug, Clone, Default)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean, sample std / sqrt(n).
    pub fn std_error(&self) -> f64 {
        if self.count > 0 {
            self.std_dev() / (self.count as f64).sqrt()
        } else {
            0.0
        }
    }
}

/// Accumulate a sample stream into mean and standard error.
///
/// Rejects fewer than two samples; the accumulation order is the iteration
/// order, so results are deterministic for a deterministic input.
pub fn mc_mean(values: impl IntoIterator<Item = f64>) -> Result<RunningStats> {
    let mut stats = RunningStats::new();
    for v in values {
        stats.push(v);
    }
    if stats.count() < 2 {
        return Err(CoreError::InvalidParameter(format!(
            "mc_mean needs n >= 2 samples, got {}",
            stats.count()
        )));
    }
    Ok(stats)
}

/// One verified quantity: a Monte Carlo (or deterministic) estimate together
/// with the reference it is gated against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub name: String,
    pub n_samples: u64,
    pub mean: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    pub pass: bool,
    /// Where the reference comes from: "closed-form", "quadrature",
    /// "oracle-mc", "deterministic", or "diagnostic" (not gated).
    pub provenance: String,
}

impl MomentReport {
    /// Gate a Monte Carlo estimate against a reference at `z_gate` standard
    /// errors.
    pub fn gated(
        name: impl Into<String>,
        stats: &RunningStats,
        reference: f64,
        z_gate: f64,
        provenance: &str,
    ) -> Self {
        let se = stats.std_error();
        let z = if se > 0.0 {
            (stats.mean() - reference) / se
        } else if stats.mean() == reference {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            name: name.into(),
            n_samples: stats.count(),
            mean: stats.mean(),
            std_error: se,
            analytic_reference: Some(reference),
            z_score: Some(z),
            pass: z.abs() <= z_gate,
            provenance: provenance.to_string(),
        }
    }

    /// Gate a deterministic residual against an absolute tolerance.
    pub fn residual(name: impl Into<String>, residual: f64, tol: f64, provenance: &str) -> Self {
        Self {
            name: name.into(),
            n_samples: 1,
            mean: residual,
            std_error: 0.0,
            analytic_reference: Some(tol),
            z_score: None,
            pass: residual.abs() <= tol,
            provenance: provenance.to_string(),
        }
    }

    /// Record a boolean gate with a measured value attached.
    pub fn gate(name: impl Into<String>, value: f64, pass: bool, provenance: &str) -> Self {
        Self {
            name: name.into(),
            n_samples: 1,
            mean: value,
            std_error: 0.0,
            analytic_reference: None,
            z_score: None,
            pass,
            provenance: provenance.to_string(),
        }
    }

    /// Record a non-gating diagnostic value (always passes).
    pub fn diagnostic(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            n_samples: 1,
            mean: value,
            std_error: 0.0,
            analytic_reference: None,
            z_score: None,
            pass: true,
            provenance: "diagnostic".to_string(),
        }
    }
}

/// Map `f` over `0..n` in parallel, collecting results in index order.
///
/// Work item `i` must derive all randomness from its index, so the output
/// is bit-identical for any worker count; the caller then reduces the
/// returned vector sequentially (fixed accumulation order).
pub fn indexed_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Run `f` on a dedicated pool with the given number of workers.
pub fn run_with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (-1)^{j-1} e^{-2 j² λ²}.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test; returns (D, approximate p-value).
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    (d, kolmogorov_q(lambda))
}

/// One-sample Kolmogorov–Smirnov test against a reference CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut a = xs.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n as f64).abs());
        d = d.max(((i + 1) as f64 / n as f64 - c).abs());
    }
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    (d, kolmogorov_q(lambda))
}

/// z-statistic of the sample correlation of two equally long series
/// (√n · ρ̂ is asymptotically standard normal under independence).
pub fn correlation_z(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    let rho = sxy / (sxx * syy).sqrt();
    rho * n.sqrt()
}

/// Ratio estimator mean(numers)/mean(denoms) with a delta-method standard
/// error computed from per-sample influence values.
pub fn ratio_with_se(numers: &[f64], denoms: &[f64]) -> (f64, f64) {
    assert_eq!(numers.len(), denoms.len());
    let n = numers.len() as f64;
    let num_mean = numers.iter().sum::<f64>() / n;
    let den_mean = denoms.iter().sum::<f64>() / n;
    let ratio = num_mean / den_mean;
    let mut infl = RunningStats::new();
    for (&a, &b) in numers.iter().zip(denoms) {
        infl.push((a - ratio * b) / den_mean);
    }
    (ratio, infl.std_error())
}
