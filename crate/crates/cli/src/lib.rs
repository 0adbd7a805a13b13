//! Command-line harness for the sl2drift toolkit: configuration,
//! deterministic parallel execution, CSV/JSON reporting, and the
//! acceptance suite.

use sl2drift::CoreError;

pub mod acceptance;
pub mod commands;
pub mod config;

/// Classified failures mapped to process exit codes: configuration
/// errors exit 2, numerical failures exit 3 (gate failures exit 1 and are
/// not errors).
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_)
            | CoreError::GridUnresolved(_)
            | CoreError::EmptyShell { .. } => RunError::Config(e.to_string()),
            CoreError::StepFailed { .. }
            | CoreError::QuadratureNotConverged { .. }
            | CoreError::CflViolation(_)
            | CoreError::Numerical(_) => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Config(e.to_string())
    }
}
