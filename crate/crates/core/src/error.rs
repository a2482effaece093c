use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} is outside the chart domain")]
    Domain { point: Vec<f64> },

    #[error("non-finite value produced by {what}")]
    NonFinite { what: String },

    #[error("metric is not positive definite: smallest eigenvalue {min_eigenvalue:e} <= threshold {threshold:e}")]
    SingularMetric { min_eigenvalue: f64, threshold: f64 },

    #[error("vectors span a degenerate plane (gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },

    #[error("sign calibration failed: {0}")]
    Calibration(String),

    #[error("invalid indices: {0}")]
    Index(String),

    #[error("dimension {dim} not supported here: {reason}")]
    Dimension { dim: usize, reason: &'static str },

    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("expression parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
