//! Shared error type for the whole crate.
//!
//! Errors fall into two rough groups, mirrored by the CLI exit codes:
//! caller mistakes (bad parameters or arguments, exit code 2) and internal
//! consistency failures that should never occur for valid inputs
//! (exit code 3).

use crate::series::BoundedValue;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter violates its documented range. The message names the
    /// offending value and the bound it broke.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    /// A function argument is outside the mathematical domain of the
    /// operation (e.g. a decay ratio with magnitude >= 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural property that is guaranteed for valid parameters was
    /// observed to fail; indicates a bug, not a user error.
    #[error("internal consistency violation: {0}")]
    ClaimViolation(String),

    /// The tridiagonal hitting-time system could not be solved.
    #[error("singular tridiagonal system: {0}")]
    SingularSystem(String),

    /// The stationary-distribution linear solve failed.
    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    /// The certified-truncation search gave up: reaching the requested
    /// interval width would need more than the supported number of series
    /// terms. Carries the best certified interval that was achieved.
    #[error(
        "truncation limit exceeded: width {:.3e} at l_s = {} (requested accuracy needs more than {} terms)",
        best.upper - best.lower, best.l_s, crate::series::LS_LIMIT
    )]
    TruncationLimit {
        /// Best certified interval achieved within the practical budget.
        best: BoundedValue,
    },

    /// A simulation report with no completed cycles cannot yield cycle
    /// statistics.
    #[error("simulation report contains no completed cycles")]
    EmptyReport,
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to: 2 for caller errors,
    /// 3 for internal consistency failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OutOfRange(_) | Error::Domain(_) | Error::EmptyReport => 2,
            Error::ClaimViolation(_)
            | Error::SingularSystem(_)
            | Error::SolveFailure(_)
            | Error::TruncationLimit { .. } => 3,
        }
    }
}
