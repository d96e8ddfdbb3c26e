use std::path::PathBuf;

use thiserror::Error;

use crate::estimator::EstimationReport;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// An off-diagonal edge weight is not strictly inside (0, 1).
    /// Indices are 1-based.
    #[error("invalid edge weight w[{row},{col}] = {value}: must lie strictly inside (0, 1)")]
    InvalidWeight { row: usize, col: usize, value: f64 },

    /// A count entry is negative or not finite. Indices are 1-based.
    #[error("invalid count x[{row},{col}] = {value}: must be finite and nonnegative")]
    InvalidCount { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The statistic sits on the boundary of the bound
    /// `sum R + sum C <= -2 ln 2 n(n-1)`, so no finite starting point exists.
    #[error(
        "degenerate sufficient statistics: M = {m} does not exceed ln 2 \
         (the log-weight bound holds with equality, e.g. every weight is exactly 1/2)"
    )]
    DegenerateStats { m: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("iteration did not converge after {} iterations (last step {:.3e}, residual {:.3e})",
        .report.iterations, .report.final_step, .report.final_residual)]
    NonConvergence { report: Box<EstimationReport> },

    /// A parameter crossed the overflow cap during iteration.
    #[error("iteration diverged at step {iteration}: parameter exceeded {cap:e}")]
    Divergence { iteration: usize, cap: f64 },

    #[error("numeric failure in {func}: {detail}")]
    Numeric { func: &'static str, detail: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
