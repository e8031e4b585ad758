//! Canonical JSON rendering.
//!
//! `serde_json::Value` objects are backed by a `BTreeMap`, so routing a value
//! through `to_value` sorts every object's keys. All persisted artifacts use
//! these helpers so identical inputs give identical bytes.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn to_canonical_value<T: Serialize>(value: &T) -> serde_json::Result<serde_json::Value> {
    serde_json::to_value(value)
}

/// Single-line canonical JSON, suitable for one record of a JSONL stream.
pub fn to_canonical_line<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = to_canonical_value(value)?;
    serde_json::to_string(&v)
}

/// Pretty canonical JSON for standalone documents.
pub fn to_canonical_pretty<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = to_canonical_value(value)?;
    serde_json::to_string_pretty(&v)
}

pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut out: W) -> Result<(), JsonlError> {
    for r in records {
        let line = to_canonical_line(r).map_err(|e| JsonlError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads one record per nonblank line; errors carry 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(input: R) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| JsonlError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Unsorted {
        zeta: u8,
        alpha: u8,
        mid: Vec<u8>,
    }

    #[test]
    fn keys_come_out_sorted() {
        let line = to_canonical_line(&Unsorted {
            zeta: 1,
            alpha: 2,
            mid: vec![3],
        })
        .unwrap();
        assert_eq!(line, r#"{"alpha":2,"mid":[3],"zeta":1}"#);
    }

    #[test]
    fn jsonl_reports_line_numbers() {
        let mut buf = Vec::new();
        write_jsonl(&[1u8, 2], &mut buf).unwrap();
        assert_eq!(read_jsonl::<u8, _>(buf.as_slice()).unwrap(), vec![1, 2]);
        let err = read_jsonl::<u8, _>("1\n\nx\n".as_bytes()).unwrap_err();
        assert!(matches!(err, JsonlError::Parse { line: 3, .. }));
    }
}
