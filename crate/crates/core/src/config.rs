//! JSON scenario files.
//!
//! Every field is required (only `envelope.e1_0` and the `pitch` section may
//! be null or absent) and unknown fields are rejected, so a file always
//! describes the complete run.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::error::Error;
use crate::sim::Scenario;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    /// Syntax error, unknown field, missing field or wrong type.
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    /// Well-formed file whose values break a scenario invariant.
    #[error("config rejected: {0}")]
    Invalid(#[from] Error),
}

/// Parse and validate a scenario.
pub fn from_json_str(text: &str) -> Result<Scenario, ConfigError> {
    let sc: Scenario = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        // serde_json appends the position itself; keep the bare message.
        message: strip_position(&e.to_string()),
    })?;
    sc.validate()?;
    Ok(sc)
}

pub fn load(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    from_json_str(&text)
}

/// The effective configuration, pretty-printed.
pub fn to_json_string(sc: &Scenario) -> String {
    serde_json::to_string_pretty(sc).expect("scenario serialization is infallible")
}

pub fn save(sc: &Scenario, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, to_json_string(sc) + "\n")
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
