use std::fmt;
use std::path::Path;

use multistop::error::Error;
use serde_json::json;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Config(String),
    Io(String),
    Numerical(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => core_kind(e),
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "numerical" | "logic" => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}

fn core_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) | Error::Config(_) => "config",
        Error::Numerical { .. } => "numerical",
        Error::Logic(_) => "logic",
        Error::Cell { source, .. } => core_kind(source),
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) | CliError::Io(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}
