use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid grid, solver or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The time integration produced a non-finite value or blew up.
    #[error("run diverged at t = {t}: {detail}")]
    Divergence { t: f64, detail: String },

    /// Two fields were compared on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Not enough data for a fit or a classification.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
