//! Newline-delimited JSON records: one UTF-8 JSON object per line.
//!
//! This is the interchange format for visit corpora, prepared notes,
//! vocabularies, metrics and node profiles. Blank lines are ignored on read.

use std::io::{BufRead, Write};

use serde::{de::DeserializeOwned, Serialize};

use crate::{Error, Result};

pub fn write_records<T: Serialize, W: Write>(mut out: W, records: &[T]) -> Result<()> {
    for r in records {
        write_record(&mut out, r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_record<T: Serialize, W: Write>(mut out: W, record: &T) -> Result<()> {
    let line = serde_json::to_string(record).map_err(|e| Error::format("record", e.to_string()))?;
    out.write_all(line.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_records<T: DeserializeOwned, R: BufRead>(input: R, artifact: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec =
            serde_json::from_str(&line).map_err(|e| Error::format(artifact, format!("line {}: {e}", lineno + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn to_string<T: Serialize>(records: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn from_str<T: DeserializeOwned>(text: &str, artifact: &str) -> Result<Vec<T>> {
    read_records(text.as_bytes(), artifact)
}
