use std::fmt;

use smnas_core::Error;

/// A command failure and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or configuration: exit 2.
    Input(String),
    /// Filesystem trouble: exit 3.
    Io(String),
    /// Evaluator or runtime failure: exit 4.
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Failure::Input(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Io(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. } => Failure::Io(msg),
            Error::Csv(ref c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => Failure::Io(msg),
            Error::Evaluator(_) | Error::TooManyFailures(_) | Error::Mutation { .. } => {
                Failure::Runtime(msg)
            }
            _ => Failure::Input(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;
