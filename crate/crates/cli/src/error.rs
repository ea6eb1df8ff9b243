use coded_caching_core::Error as CoreError;

/// Errors surfaced by the command-line front end, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// 0 success, 2 config error, 3 verification failure, 4 resource guard,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Core(CoreError::InvalidParameter(_)) => 2,
            CliError::Verification(_) => 3,
            CliError::Core(CoreError::ResourceGuard { .. }) => 4,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 3);
        let guard = CoreError::ResourceGuard {
            vertices: 10,
            n: 2,
            packets: 5,
            cap: 4,
        };
        assert_eq!(CliError::from(guard).exit_code(), 4);
        assert_eq!(CliError::Other("x".into()).exit_code(), 1);
    }
}
