use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub equation: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {}", join(.0))]
    Validation(Vec<Diagnostic>),
    #[error("solver fault: {0}")]
    Solver(String),
    #[error("{0}")]
    Unsupported(String),
}

fn join(d: &[Diagnostic]) -> String {
    d.iter().map(|x| x.message.clone()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(vec![Diagnostic {
            equation: None,
            message: msg.into(),
        }])
    }

    /// True for malformed or non-probabilistic input, as opposed to solver faults.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
