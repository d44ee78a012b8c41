use thiserror::Error;

/// Process exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_RESOURCE_GUARD: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("refused: {0}")]
    Budget(twedge_core::Error),
    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
    #[error(transparent)]
    Numeric(twedge_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_INVALID_CONFIG,
            CliError::Budget(_) => EXIT_RESOURCE_GUARD,
            CliError::VerifyFailed(_) | CliError::Numeric(_) | CliError::Io { .. } => EXIT_VERIFY_FAILED,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<twedge_core::Error> for CliError {
    fn from(e: twedge_core::Error) -> Self {
        match e {
            twedge_core::Error::Budget { .. } => CliError::Budget(e),
            twedge_core::Error::InvalidArgument(_) | twedge_core::Error::OutOfRange { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }
}
