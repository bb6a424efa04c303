use nmlkit_core::error::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),

    #[error("{context}{source}")]
    Core {
        context: String,
        #[source]
        source: Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<Error> for CliError {
    fn from(source: Error) -> Self {
        CliError::Core {
            context: String::new(),
            source,
        }
    }
}

impl CliError {
    /// Attach the input path to a parse error.
    pub fn in_file(path: &std::path::Path) -> impl Fn(Error) -> CliError + '_ {
        move |source| CliError::Core {
            context: format!("{}: ", path.display()),
            source,
        }
    }

    pub fn is_resource_limit(&self) -> bool {
        matches!(self, CliError::Core { source, .. } if source.is_resource_limit())
    }

    /// 2 for bad invocations and unreadable input, 3 for resource limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(..) => 2,
            CliError::Core { source, .. } => match source {
                Error::ResourceLimit { .. } => 3,
                Error::Syntax { .. }
                | Error::Format { .. }
                | Error::BeliefInPropositional
                | Error::ConnectiveNotInBasis(_)
                | Error::UnknownName(_) => 2,
                _ => 1,
            },
            CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}
