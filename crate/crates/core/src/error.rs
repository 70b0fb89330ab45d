use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected} arguments, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("inner map mismatch: expansion is for `{expected}`, got `{got}`")]
    KindMismatch { expected: String, got: String },

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
