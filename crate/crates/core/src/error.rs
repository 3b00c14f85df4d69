//! Crate-wide error type.

use thiserror::Error;

use crate::analysis::LorentzianFit;

/// A single configuration violation, keyed by the dotted config path.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unstable cavity geometry: {0}")]
    UnstableCavity(String),

    #[error("above lasing threshold: gain per pass {gain:.6e} >= loss per pass {loss:.6e}")]
    AboveThreshold { gain: f64, loss: f64 },

    #[error("invalid rates: {0}")]
    InvalidRates(String),

    #[error("no unique steady state: {0}")]
    NoUniqueSteadyState(String),

    #[error("singular linear system at pivot {pivot}")]
    SingularSystem { pivot: usize },

    #[error("invalid reference value: {0}")]
    InvalidReference(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient peaks: found {found}, need at least {need}")]
    InsufficientPeaks { found: usize, need: usize },

    #[error(
        "fit did not converge after {iterations} iterations \
         (cost {cost:.6e}, last relative step {step:.3e})"
    )]
    FitFailed {
        iterations: usize,
        cost: f64,
        step: f64,
    },

    #[error("degenerate double-Lorentzian fit: {reason}")]
    DegenerateFit {
        reason: String,
        /// Best-effort single-Lorentzian description of the spectrum.
        fallback: Box<LorentzianFit<f64>>,
    },

    #[error("calibration did not converge: {}", format_residuals(.residuals))]
    CalibrationFailed { residuals: Vec<(String, f64)> },

    #[error("configuration parse error: {0}")]
    ConfigParse(String),

    #[error("configuration invalid:\n{}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config key `{0}` is not numeric")]
    NonNumericKey(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn format_residuals(residuals: &[(String, f64)]) -> String {
    residuals
        .iter()
        .map(|(name, r)| format!("{name}={r:.4e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
