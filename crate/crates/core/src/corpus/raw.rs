use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// One scraped tweet as saved by the collection tool, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTweet {
    pub timestamp: String,
    pub id: String,
    pub text: String,
    pub user: String,
    pub fullname: String,
    pub replies: u64,
    pub retweets: u64,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: invalid JSON: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: expected a JSON object")]
    NotAnObject { line: usize },
    #[error("line {line}: missing field: {field}")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: field {field} has the wrong type")]
    BadField { line: usize, field: &'static str },
    #[error("line {line}: field {field} must not be empty")]
    EmptyField { line: usize, field: &'static str },
    #[error("read error: {0}")]
    Io(#[from] io::Error),
}

impl IngestError {
    pub fn line(&self) -> Option<usize> {
        match self {
            IngestError::Json { line, .. }
            | IngestError::NotAnObject { line }
            | IngestError::MissingField { line, .. }
            | IngestError::BadField { line, .. }
            | IngestError::EmptyField { line, .. } => Some(*line),
            IngestError::Io(_) => None,
        }
    }
}

/// Decodes a JSON-lines stream. Fails on the first bad line; blank lines are skipped.
pub fn ingest_raw<R: BufRead>(input: R) -> Result<Vec<RawTweet>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(decode_line(&line, i + 1)?);
    }
    Ok(out)
}

/// Like [`ingest_raw`] but skips bad lines, returning them alongside the good records.
/// Read errors still abort.
pub fn ingest_raw_lenient<R: BufRead>(input: R) -> Result<(Vec<RawTweet>, Vec<IngestError>), IngestError> {
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match decode_line(&line, i + 1) {
            Ok(t) => out.push(t),
            Err(e) => skipped.push(e),
        }
    }
    Ok((out, skipped))
}

fn decode_line(line: &str, lineno: usize) -> Result<RawTweet, IngestError> {
    let value: Value = serde_json::from_str(line).map_err(|source| IngestError::Json { line: lineno, source })?;
    let Value::Object(obj) = value else {
        return Err(IngestError::NotAnObject { line: lineno });
    };
    let id = string_field(&obj, "id", lineno)?.ok_or(IngestError::MissingField { line: lineno, field: "id" })?;
    let text =
        string_field(&obj, "text", lineno)?.ok_or(IngestError::MissingField { line: lineno, field: "text" })?;
    if id.is_empty() {
        return Err(IngestError::EmptyField { line: lineno, field: "id" });
    }
    if text.is_empty() {
        return Err(IngestError::EmptyField { line: lineno, field: "text" });
    }
    Ok(RawTweet {
        timestamp: string_field(&obj, "timestamp", lineno)?.unwrap_or_default(),
        id,
        text,
        user: string_field(&obj, "user", lineno)?.unwrap_or_default(),
        fullname: string_field(&obj, "fullname", lineno)?.unwrap_or_default(),
        replies: count_field(&obj, "replies", lineno)?,
        retweets: count_field(&obj, "retweets", lineno)?,
    })
}

/// Strings are taken as-is; numeric ids are rendered in decimal.
fn string_field(obj: &Map<String, Value>, field: &'static str, line: usize) -> Result<Option<String>, IngestError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(_) => Err(IngestError::BadField { line, field }),
    }
}

fn count_field(obj: &Map<String, Value>, field: &'static str, line: usize) -> Result<u64, IngestError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(0),
        Some(Value::Number(n)) => n.as_u64().ok_or(IngestError::BadField { line, field }),
        Some(Value::String(s)) => s.trim().parse().map_err(|_| IngestError::BadField { line, field }),
        Some(_) => Err(IngestError::BadField { line, field }),
    }
}
