use thiserror::Error;

use crate::design::Violation;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{quantity} = {value} is outside the admissible range {range}")]
    Domain {
        quantity: &'static str,
        value: f64,
        range: String,
    },

    #[error("activation shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("design failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
