//! Error type shared by all library modules.
//!
//! The variants mirror the process exit codes of the command-line front end:
//! configuration problems exit with 2, numerical non-convergence with 3, and
//! violated mathematical invariants (a positivity or normalization guarantee
//! failing on computed data) with 1.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition (bad dimension, negative
    /// dilation factor, angle outside its case domain, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A run configuration failed validation; the message lists every
    /// violation with its line number.
    #[error("configuration error:\n{0}")]
    Config(String),

    /// An evaluation point (or a whole gauge ball) left the grid domain, or
    /// an interpolation stencil could not be completed.
    #[error("domain error: {0}")]
    OutOfDomain(String),

    /// An iterative or extrapolated computation failed to reach its
    /// advertised tolerance; the message reports the witnessed values.
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    /// A mathematical invariant that must hold on computed data (H > 0,
    /// N > -1, normalization of rescaled traces) was violated.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Filesystem problem while persisting outputs.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// 0 is success (no error), 1 invariant failure, 2 configuration error,
    /// 3 numerical non-convergence.  I/O and precondition problems are
    /// treated as configuration-class failures (exit 2).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 1,
            Error::InvalidArgument(_) | Error::Config(_) | Error::Io(_) => 2,
            Error::OutOfDomain(_) => 2,
            Error::NonConvergence(_) => 3,
        }
    }
}
