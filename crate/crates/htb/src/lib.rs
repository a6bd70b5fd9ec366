//! Standard-library companion to `htb-core`: JSON analysis configs,
//! report documents (JSON/CSV), a binary batch-file format, and a
//! chunk-parallel sampling driver. The `htb` binary in this crate wires
//! these into a command-line tool; the modules are public so tests and
//! downstream code can drive the same paths directly.

#![forbid(unsafe_code)]

pub mod batchfile;
pub mod config;
pub mod error;
pub mod parallel;
pub mod report;
pub mod runner;

pub use config::{load_config, AnalysisConfig};
pub use error::{AppError, AppResult, ValidationIssue};
pub use runner::Format;
