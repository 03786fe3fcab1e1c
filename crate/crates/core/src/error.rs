use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes of the process, machine and spectrum constructions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The past `t` has zero survival probability, so no causal state exists for it.
    #[error("unreachable past: survival probability at t = {t} is zero")]
    UnreachablePast { t: f64 },

    /// A grid state lies past the support of a bounded process.
    #[error("zero survival at grid state {state} (t = {t}); grid extends past the support")]
    ZeroSurvival { state: usize, t: f64 },

    #[error("grid misaligned: {0}")]
    GridMisaligned(String),

    #[error("survival did not fall below {eps_tail:e} before t = {cap}")]
    TailNotReached { eps_tail: f64, cap: f64 },

    #[error("grid of {n} states exceeds the default cap of {cap}; pass allow_large_n to unlock")]
    GridTooLarge { n: usize, cap: usize },

    #[error("matrix is not symmetric: max |M - M^T| = {max_asymmetry:e}")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix trace {trace} deviates from 1 by more than {tolerance:e}")]
    TraceViolation { trace: f64, tolerance: f64 },

    #[error("spectrum has negative mass {negative_mass:e} (most negative eigenvalue {min_eigenvalue:e}, n = {dim})")]
    NegativeSpectrum {
        negative_mass: f64,
        min_eigenvalue: f64,
        dim: usize,
    },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix (trace {trace}, max |entry| {max_abs:e})")]
    EigenFailure { dim: usize, trace: f64, max_abs: f64 },

    #[error("root finding failed in interval [{lo}, {hi}): {reason}")]
    RootNotFound { lo: f64, hi: f64, reason: String },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that come from numerics rather than from bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotSymmetric { .. }
                | Error::TraceViolation { .. }
                | Error::NegativeSpectrum { .. }
                | Error::EigenFailure { .. }
                | Error::RootNotFound { .. }
                | Error::TailNotReached { .. }
        )
    }

    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
