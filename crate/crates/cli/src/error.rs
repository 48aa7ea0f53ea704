use reachcloud_atlas::AtlasError;
use reachcloud_core::ModelError;
use reachcloud_hull::HullError;
use thiserror::Error;

/// Failure categories, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let msg = e.to_string();
        match e {
            ModelError::Domain { .. } => CliError::Numeric(msg),
            ModelError::Shape(_) | ModelError::Parameter(_) | ModelError::Validation(_) => CliError::Validation(msg),
            ModelError::Io { .. } | ModelError::Parse { .. } => CliError::Io(msg),
        }
    }
}

impl From<HullError> for CliError {
    fn from(e: HullError) -> Self {
        let msg = e.to_string();
        match e {
            HullError::Io { .. } | HullError::Parse { .. } => CliError::Io(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

impl From<AtlasError> for CliError {
    fn from(e: AtlasError) -> Self {
        match e {
            AtlasError::Spec(m) => CliError::Validation(format!("invalid atlas spec: {m}")),
            AtlasError::Model(e) => e.into(),
            AtlasError::Hull(e) => e.into(),
            e @ (AtlasError::Io { .. } | AtlasError::Parse { .. }) => CliError::Io(e.to_string()),
        }
    }
}

pub(crate) fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
