use thiserror::Error;

/// Errors raised anywhere in the lab.
///
/// Variants map onto the CLI exit codes through [`LabError::exit_code`].
#[derive(Debug, Error)]
pub enum LabError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation failed: {0}")]
    Validation(String),

    /// A tractability guard was violated. Names the offending parameter.
    #[error("guard violation on `{param}`: {reason}")]
    Guard { param: &'static str, reason: String },

    #[error("insufficient precision: {0}")]
    Precision(String),

    #[error("unsupported moment degree t = {0} (exact Haar moments are available for t <= 2)")]
    UnsupportedDegree(usize),

    #[error("collision: {0}")]
    Collision(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl LabError {
    pub fn guard(param: &'static str, reason: impl Into<String>) -> Self {
        LabError::Guard {
            param,
            reason: reason.into(),
        }
    }

    /// 0 success, 2 validation, 3 guard violation, 4 precision, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Shape(_)
            | LabError::Domain(_)
            | LabError::Validation(_)
            | LabError::Collision(_)
            | LabError::UnsupportedDegree(_) => 2,
            LabError::Guard { .. } => 3,
            LabError::Precision(_) => 4,
            LabError::Io(_) | LabError::Serialization(_) => 1,
        }
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Serialization(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Serialization(e.to_string())
    }
}

impl From<toml::de::Error> for LabError {
    fn from(e: toml::de::Error) -> Self {
        LabError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
