use std::path::PathBuf;

use imcf_core::ImcfError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
    #[error("malformed config: {0}")]
    Config(String),
    #[error("unknown check suite '{0}' (expected willmore, beckner, evolution, sphere-oracle or af2)")]
    UnknownSuite(String),
    #[error("IMCF_THREADS must be a positive integer, got '{0}'")]
    Threads(String),
    #[error("flow aborted at t = {t}: {message}")]
    GuardAbort { t: f64, kind: String, message: String },
    #[error(transparent)]
    Core(#[from] ImcfError),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
}

impl CliError {
    pub fn kind(&self) -> &str {
        match self {
            CliError::Read { .. } => "read_error",
            CliError::Write { .. } => "write_error",
            CliError::Config(_) => "config_error",
            CliError::UnknownSuite(_) => "unknown_suite",
            CliError::Threads(_) => "invalid_threads",
            CliError::GuardAbort { kind, .. } => kind,
            CliError::Core(e) => e.kind(),
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        let t = match self {
            CliError::GuardAbort { t, .. } => Some(*t),
            _ => None,
        };
        serde_json::to_string(&ErrorRecord {
            error: self.kind(),
            message: self.to_string(),
            t,
        })
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}
