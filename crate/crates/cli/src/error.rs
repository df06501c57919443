use std::fmt;

use sixcyl_core::Error;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    /// Carries the finished report, which is still printed.
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
            CliError::Verification(_) => f.write_str("verification failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Degenerate(_) | Error::TanPole(_) | Error::RadiusUnbounded(_) => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("I/O: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(format!("JSON: {e}"))
    }
}
