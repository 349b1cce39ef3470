//! Error type shared by every module of the library.

use thiserror::Error;

/// Library error.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A model or configuration parameter is invalid.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The model is valid but not in the long-range-dependent regime.
    #[error("not in the long-range-dependent regime: {0}")]
    Regime(String),
    /// The requested combination is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A numerical routine failed to reach the requested accuracy.
    #[error("accuracy not reached: {0}")]
    Accuracy(String),
    /// An integral diverges for the given exponent and dimension.
    #[error("integral diverges: {0}")]
    Integrability(String),
    /// The circulant embedding produced significantly negative eigenvalues.
    #[error("circulant embedding failed: {0}")]
    Embedding(String),
    /// The simulated lattice does not cover the observation set.
    #[error("lattice does not cover the observation set: {0}")]
    Coverage(String),
    /// A functional does not have the assumed Hermite rank.
    #[error("Hermite rank violation: {0}")]
    RankViolation(String),
    /// No nonzero Hermite coefficient was found up to the requested order.
    #[error("Hermite rank not detected: {0}")]
    RankUndetected(String),
    /// Empty or non-finite input data.
    #[error("invalid input: {0}")]
    Input(String),
    /// Too few points, or a degenerate design, for a regression.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    /// A numerical failure such as a non-finite intermediate result.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// A precondition of the theory is violated by the supplied parameters.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// File system failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable numeric code used by the C interface.
    pub fn code(&self) -> i32 {
        match self {
            Error::Domain(_) => 1,
            Error::Parameter(_) => 2,
            Error::Regime(_) => 3,
            Error::Unsupported(_) => 4,
            Error::Accuracy(_) => 5,
            Error::Integrability(_) => 6,
            Error::Embedding(_) => 7,
            Error::Coverage(_) => 8,
            Error::RankViolation(_) => 9,
            Error::RankUndetected(_) => 10,
            Error::Input(_) => 11,
            Error::DegenerateFit(_) => 12,
            Error::Numeric(_) => 13,
            Error::Precondition(_) => 14,
            Error::Io(_) => 15,
            Error::Json(_) => 16,
        }
    }
}
