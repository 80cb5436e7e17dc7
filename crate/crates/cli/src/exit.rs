use std::fmt;
use std::process::ExitCode;

use parkaug::Error;

pub const CONFIG: u8 = 2;
pub const IO: u8 = 3;
pub const ZERO_SUCCESS: u8 = 4;

/// A failure mapped to its process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    ZeroSuccess(String),
}

impl CliError {
    pub fn code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => CONFIG,
            CliError::Io(_) => IO,
            CliError::ZeroSuccess(_) => ZERO_SUCCESS,
        })
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::ZeroSuccess(_) => "zero_success",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::ZeroSuccess(m) => m,
        }
    }

    pub fn report(&self) {
        crate::event("error", serde_json::json!({ "kind": self.kind(), "message": self.message() }));
        eprintln!("error: {self}");
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. } | Error::Image { .. } => CliError::Io(msg),
            Error::GenerationFailed(_) => CliError::ZeroSuccess(msg),
            _ => CliError::Config(msg),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
