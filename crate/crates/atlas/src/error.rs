use thiserror::Error;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("invalid atlas spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Model(#[from] reachcloud_core::ModelError),

    #[error(transparent)]
    Hull(#[from] reachcloud_hull::HullError),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Parse { what: String, message: String },
}

pub type Result<T, E = AtlasError> = std::result::Result<T, E>;

pub(crate) fn io_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> AtlasError + '_ {
    move |source| AtlasError::Io {
        path: path.display().to_string(),
        source,
    }
}
