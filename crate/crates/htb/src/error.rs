//! Application-level error type with process exit-code mapping.

use std::fmt;
use std::path::PathBuf;

/// One problem found while validating a config document, addressed by
/// a JSON pointer into that document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// JSON pointer (RFC 6901) to the offending value; empty for the
    /// document root.
    pub pointer: String,
    /// What is wrong with it.
    pub message: String,
}

impl ValidationIssue {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue { pointer: pointer.into(), message: message.into() }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() {
            write!(f, "(root): {}", self.message)
        } else {
            write!(f, "{}: {}", self.pointer, self.message)
        }
    }
}

/// Everything that can go wrong while running a command.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// The config document (or command parameters) failed validation.
    #[error("invalid configuration:\n{}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),
    /// A computation rejected its inputs; parameters are inconsistent.
    #[error("computation rejected the configured inputs: {0}")]
    Core(#[from] htb_core::Error),
    /// Reading or writing a file failed.
    #[error("I/O failure at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Serializing a report failed (internal fault).
    #[error("report encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl AppError {
    pub fn validation_one(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        AppError::Validation(vec![ValidationIssue::new(pointer, message)])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// Process exit code contract: 2 for anything the user can fix in
    /// the config or parameters, 1 for I/O and internal faults. (Code 3,
    /// a detected guaranteed-bound violation, is decided by the runner,
    /// not by an error value.)
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Validation(_) | AppError::Core(_) => 2,
            AppError::Io { .. } | AppError::Json(_) => 1,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
