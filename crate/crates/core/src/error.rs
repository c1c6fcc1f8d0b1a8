use thiserror::Error;

/// Errors raised anywhere in the analysis and optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The structural model is malformed (bad ids, zero-length element, ...).
    #[error("model error: {0}")]
    Model(String),

    /// A design variable, binding or optimizer setting is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The reduced stiffness matrix is singular or indefinite.
    #[error("mechanism detected: {0}")]
    Mechanism(String),

    /// An iterative numerical method failed or produced non-finite values.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A problem document failed schema or cross-reference validation.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
