use thiserror::Error;

/// Command failure, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Library(#[from] naimark::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Library(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Verification(_) => "verification",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Library(e) if e.is_numerical() => "numerical",
            CliError::Library(_) => "input",
        }
    }

    pub fn message(&self) -> String {
        self.to_string()
    }

    /// Single machine-readable line for standard error.
    pub fn line(&self) -> String {
        format!("error kind={} code={} message={:?}", self.kind(), self.exit_code(), self.message())
    }
}

pub fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        assert_eq!(CliError::Verification("x".into()).exit_code(), 1);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(naimark::Error::InvalidInput("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(naimark::Error::IntegrationFailure { t: 0.0 }).exit_code(), 3);
        let line = CliError::Config("bad \"k\"".into()).line();
        assert_eq!(line, r#"error kind=config code=2 message="bad \"k\"""#);
    }
}
