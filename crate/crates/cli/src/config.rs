//! Run configurations: JSON files with strict key checking, overridden by
//! command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::RunError;

fn default_workers() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from(".")
}

macro_rules! config_loader {
    ($ty:ty) => {
        impl $ty {
            pub fn load(path: Option<&Path>) -> Result<Self, RunError> {
                match path {
                    None => Ok(Self::default()),
                    Some(p) => {
                        let text = std::fs::read_to_string(p).map_err(|e| {
                            RunError::Config(format!("cannot read config {}: {e}", p.display()))
                        })?;
                        serde_json::from_str(&text).map_err(|e| {
                            RunError::Config(format!("invalid config {}: {e}", p.display()))
                        })
                    }
                }
            }
        }
    };
}

/// Matrix-diffusion sweep: moments of `F` at a list of times.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sl2SimConfig {
    pub taus: Vec<f64>,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for Sl2SimConfig {
    fn default() -> Self {
        Self {
            taus: vec![0.5, 1.0, 2.0],
            dt: 1e-3,
            n_paths: 10_000,
            master_seed: 1,
            workers: default_workers(),
            out: default_out(),
        }
    }
}
config_loader!(Sl2SimConfig);

/// Scalar-process sweep: R, exact GBM, and the planar Bessel process.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalarSimConfig {
    pub taus: Vec<f64>,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for ScalarSimConfig {
    fn default() -> Self {
        Self {
            taus: vec![0.5, 1.0],
            dt: 1e-3,
            n_paths: 10_000,
            master_seed: 2,
            workers: default_workers(),
            out: default_out(),
        }
    }
}
config_loader!(ScalarSimConfig);

/// One field realization written as a spectral dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSampleConfig {
    pub epsilon: f64,
    /// Large-scale cutoff length L; 0 disables the cutoff.
    pub l_cut: f64,
    pub torus_side: f64,
    pub grid_n: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for FieldSampleConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            l_cut: 0.0,
            torus_side: 64.0 * std::f64::consts::PI,
            grid_n: 256,
            master_seed: 3,
            workers: default_workers(),
            out: default_out(),
        }
    }
}
config_loader!(FieldSampleConfig);

/// Coupling covariance check over an ensemble of realizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoupleCheckConfig {
    pub epsilon: f64,
    pub torus_side: f64,
    pub grid_n: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for CoupleCheckConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            torus_side: 128.0 * std::f64::consts::PI,
            grid_n: 512,
            n_realizations: 2_000,
            master_seed: 4,
            workers: default_workers(),
            out: default_out(),
        }
    }
}
config_loader!(CoupleCheckConfig);

/// Scale-by-scale corrector ensemble: E|F_L|² against 2λ(L²−1).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrectorRunConfig {
    pub epsilon: f64,
    pub l_max: f64,
    pub shells_per_efold: usize,
    pub torus_side: f64,
    pub grid_n: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for CorrectorRunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            l_max: (2.0f64).exp(),
            shells_per_efold: 32,
            torus_side: 256.0 * std::f64::consts::PI,
            grid_n: 512,
            n_realizations: 2_000,
            master_seed: 5,
            workers: default_workers(),
            out: default_out(),
        }
    }
}
config_loader!(CorrectorRunConfig);

/// Advection-diffusion run with increment and residual diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdeRunConfig {
    pub epsilon: f64,
    pub t_end: f64,
    pub dt: f64,
    pub torus_side: f64,
    pub grid_n: usize,
    /// Increment probe point.
    pub x: [f64; 2],
    pub shells_per_efold: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for PdeRunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.3,
            t_end: 16.0,
            dt: 0.01,
            torus_side: 64.0 * std::f64::consts::PI,
            grid_n: 256,
            x: [std::f64::consts::PI, 0.0],
            shells_per_efold: 16,
            master_seed: 6,
            workers: default_workers(),
            out: default_out(),
        }
    }
}
config_loader!(PdeRunConfig);

/// Sizes and seeds of the acceptance suite. Defaults pin the gates'
/// nominal sample counts; tolerances are fixed in the criteria themselves.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcceptConfig {
    pub master_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub n_matrix_paths: usize,
    pub n_ks: usize,
    pub n_exact_draws: usize,
    pub n_domination: usize,
    pub n_triples: usize,
    pub n_coupling: usize,
    pub n_corrector: usize,
    pub n_thermal: usize,
    pub n_diagnostic_realizations: usize,
}

impl Default for AcceptConfig {
    fn default() -> Self {
        Self {
            master_seed: 0x5EED_2026,
            workers: default_workers(),
            out: default_out(),
            n_matrix_paths: 100_000,
            n_ks: 10_000,
            n_exact_draws: 1_000_000,
            n_domination: 100_000,
            n_triples: 10_000,
            n_coupling: 10_000,
            n_corrector: 10_000,
            n_thermal: 10_000,
            n_diagnostic_realizations: 32,
        }
    }
}
config_loader!(AcceptConfig);

/// Flag overrides shared by every subcommand.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides<'a> {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<&'a Path>,
    pub dt: Option<f64>,
    pub eps: Option<f64>,
}

macro_rules! apply_common {
    ($cfg:expr, $ov:expr) => {
        if let Some(s) = $ov.seed {
            $cfg.master_seed = s;
        }
        if let Some(w) = $ov.workers {
            $cfg.workers = w;
        }
        if let Some(o) = $ov.out {
            $cfg.out = o.to_path_buf();
        }
    };
}

impl Sl2SimConfig {
    pub fn with_overrides(mut self, ov: &Overrides) -> Self {
        apply_common!(self, ov);
        if let Some(dt) = ov.dt {
            self.dt = dt;
        }
        self
    }
}

impl ScalarSimConfig {
    pub fn with_overrides(mut self, ov: &Overrides) -> Self {
        apply_common!(self, ov);
        if let Some(dt) = ov.dt {
            self.dt = dt;
        }
        self
    }
}

impl FieldSampleConfig {
    pub fn with_overrides(mut self, ov: &Overrides) -> Self {
        apply_common!(self, ov);
        if let Some(e) = ov.eps {
            self.epsilon = e;
        }
        self
    }
}

impl CoupleCheckConfig {
    pub fn with_overrides(mut self, ov: &Overrides) -> Self {
        apply_common!(self, ov);
        if let Some(e) = ov.eps {
            self.epsilon = e;
        }
        self
    }
}

impl CorrectorRunConfig {
    pub fn with_overrides(mut self, ov: &Overrides) -> Self {
        apply_common!(self, ov);
        if let Some(e) = ov.eps {
            self.epsilon = e;
        }
        self
    }
}

impl PdeRunConfig {
    pub fn with_overrides(mut self, ov: &Overrides) -> Self {
        apply_common!(self, ov);
        if let Some(dt) = ov.dt {
            self.dt = dt;
        }
        if let Some(e) = ov.eps {
            self.epsilon = e;
        }
        self
    }
}

impl AcceptConfig {
    pub fn with_overrides(mut self, ov: &Overrides) -> Self {
        apply_common!(self, ov);
        self
    }
}
