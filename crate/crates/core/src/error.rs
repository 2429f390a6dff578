use thiserror::Error;

use crate::transform::Transform;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{x} is outside the domain of the {transform} transform")]
    Domain { transform: Transform, x: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid point at index {index}: {reason}")]
    InvalidPoint { index: usize, reason: &'static str },

    #[error("invalid knots: {0}")]
    InvalidKnots(String),

    #[error("invalid slope bounds: min_slope {min} > max_slope {max}")]
    InvalidBounds { min: f64, max: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing feature `{0}`")]
    MissingFeature(String),

    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),

    #[error("{}", format_feature_errors(.0))]
    Features(Vec<(String, Error)>),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown transform `{0}`")]
    UnknownTransform(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_feature_errors(errors: &[(String, Error)]) -> String {
    let parts: Vec<String> = errors
        .iter()
        .map(|(name, err)| format!("feature `{name}`: {err}"))
        .collect();
    parts.join("; ")
}
