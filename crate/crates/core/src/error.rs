use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain where a formula is evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Fock truncation is too small for the requested state or operator.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A quadrature rule of the requested order is unavailable or insufficient.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// The grand-canonical sum diverges (spectrum unbounded below).
    #[error("divergence: {0}")]
    Divergence(String),

    /// A series did not reach its suppression threshold before the cutoff.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Richardson extrapolation of a finite difference was inconsistent.
    #[error("step error: {0}")]
    Step(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
