//! JSON documents on disk with path, line and field context in errors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::SCHEMA_VERSION;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// `serde_json` messages name the offending field.
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_owned(), source })
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    parse_json(path, &read_text(path)?)
}

/// Reads `T` either as the whole document or from its `key` member (the shape of this crate's command outputs).
pub fn read_json_member<T: DeserializeOwned>(path: &Path, key: &str) -> Result<T, IoError> {
    let value: serde_json::Value = read_json(path)?;
    let inner = match value.get(key) {
        Some(v) if value.get("schema_version").is_some() => v.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| IoError::Format { path: path.to_owned(), message: e.to_string() })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| IoError::Io { path: dir.to_owned(), source })?;
    }
    fs::write(path, text).map_err(|source| IoError::Io { path: path.to_owned(), source })
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value") + "\n"
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_text(path, &to_json_string(value))
}

/// Self-describing output document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Envelope<T> {
    pub fn new(command: &str, seed: Option<u64>, body: T) -> Self {
        Envelope { schema_version: SCHEMA_VERSION, command: command.to_owned(), seed, body }
    }
}
