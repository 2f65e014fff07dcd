use std::fmt;

use treeiso_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_CEILING: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

/// A failed run: message plus process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INVALID, message: message.into() }
    }

    pub fn tolerance(message: impl Into<String>) -> Self {
        Failure { code: EXIT_TOLERANCE, message: message.into() }
    }

    pub fn other(message: impl Into<String>) -> Self {
        Failure { code: EXIT_FAILURE, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::CeilingExceeded { .. } => EXIT_CEILING,
            Error::InvalidArgument(_)
            | Error::InvalidModel(_)
            | Error::InvalidTree(_)
            | Error::UnreachableSize { .. }
            | Error::DegreeViolation { .. }
            | Error::NotExact(_) => EXIT_INVALID,
            Error::UnstableDifference { .. } | Error::TruncationUnstable { .. } => EXIT_TOLERANCE,
            _ => EXIT_FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::other(format!("io: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::other(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::other(format!("json: {e}"))
    }
}

pub type Outcome<T> = Result<T, Failure>;
