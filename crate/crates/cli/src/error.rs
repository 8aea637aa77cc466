use std::path::Path;
use std::process::ExitCode;

/// Front-end failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Some case or check did not hold; exit 1.
    Failed(String),
    /// Malformed or invalid input; exit 2.
    Parse(String),
    /// Reading or writing failed; exit 3.
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Failed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Io(_) => 3,
        })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Failed(m) | CliError::Parse(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<nevkit::Error> for CliError {
    fn from(e: nevkit::Error) -> Self {
        match e {
            nevkit::Error::ToleranceNotReached { .. } => CliError::Failed(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}
