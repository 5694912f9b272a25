use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = LandauError> = std::result::Result<T, E>;

/// Coarse classification used by the command line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum LandauError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight validation failed: {0}")]
    WeightValidation(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too large for {operation}: n = {n} exceeds {max} (pass the force flag to override)")]
    GridTooLarge {
        operation: &'static str,
        n: usize,
        max: usize,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("no admissible cutoff radius up to {radius_max}: {detail}")]
    SearchFailure { radius_max: f64, detail: String },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("non-finite values at t = {t}")]
    BlowUp { t: f64 },

    #[error("positivity violated at t = {t}: min f = {min:e} below -{tol:e} * max f")]
    Positivity { t: f64, min: f64, tol: f64 },

    #[error("nonpositive mass {0:e}")]
    NonPositiveMass(f64),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing column `{name}`; available columns: {}", available.join(", "))]
    MissingColumn {
        name: String,
        available: Vec<String>,
    },

    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    #[error("csv {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LandauError {
    pub fn class(&self) -> ErrorClass {
        use LandauError::*;
        match self {
            InvalidParameter(_)
            | WeightValidation(_)
            | GridMismatch(_)
            | GridTooLarge { .. }
            | ConfigParse { .. }
            | Config(_)
            | MissingColumn { .. } => ErrorClass::Validation,
            Quadrature(_)
            | SearchFailure { .. }
            | DegenerateSpectrum(_)
            | Eigensolver(_)
            | BlowUp { .. }
            | Positivity { .. }
            | NonPositiveMass(_)
            | Fit(_) => ErrorClass::Numerical,
            Snapshot { .. } | Csv { .. } | Io { .. } => ErrorClass::Io,
        }
    }

    /// Short machine-parsable tag, e.g. `invalid-parameter`.
    pub fn tag(&self) -> &'static str {
        use LandauError::*;
        match self {
            InvalidParameter(_) => "invalid-parameter",
            WeightValidation(_) => "weight-validation",
            GridMismatch(_) => "grid-mismatch",
            GridTooLarge { .. } => "grid-too-large",
            Quadrature(_) => "quadrature",
            SearchFailure { .. } => "search-failure",
            DegenerateSpectrum(_) => "degenerate-spectrum",
            Eigensolver(_) => "eigensolver",
            BlowUp { .. } => "blow-up",
            Positivity { .. } => "positivity",
            NonPositiveMass(_) => "nonpositive-mass",
            Fit(_) => "fit",
            ConfigParse { .. } => "config-parse",
            Config(_) => "config",
            MissingColumn { .. } => "missing-column",
            Snapshot { .. } => "snapshot",
            Csv { .. } => "csv",
            Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LandauError::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> LandauError {
    LandauError::InvalidParameter(msg.into())
}
