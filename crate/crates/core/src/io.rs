//! File plumbing shared by every on-disk format: atomic writes, schema-versioned
//! line-delimited JSON, and content hashing.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename, so readers never observe a half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| Error::io(parent, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub(crate) fn check_schema(context: &str, found: &str, expected: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::SchemaVersion {
            context: context.to_string(),
            found: found.to_string(),
            expected: expected.to_string(),
        })
    }
}

/// Serializes a header line followed by one record per line.
pub fn to_jsonl<H: Serialize, R: Serialize>(header: &H, records: &[R]) -> Result<String> {
    let mut out = serde_json::to_string(header).map_err(|e| Error::parse("jsonl header", e))?;
    out.push('\n');
    for record in records {
        out.push_str(&serde_json::to_string(record).map_err(|e| Error::parse("jsonl record", e))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl<H: Serialize, R: Serialize>(path: &Path, header: &H, records: &[R]) -> Result<()> {
    atomic_write(path, to_jsonl(header, records)?.as_bytes())
}

/// Parses a header-first JSONL document whose header carries `schema_version`.
pub fn parse_jsonl<H: DeserializeOwned, R: DeserializeOwned>(
    text: &str,
    context: &str,
    expected_schema: &str,
) -> Result<(H, Vec<R>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::parse(context, "missing header line"))?;
    let raw: serde_json::Value =
        serde_json::from_str(first).map_err(|e| Error::parse(format!("{context}:1"), e))?;
    let found = raw
        .get("schema_version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::parse(format!("{context}:1"), "header has no schema_version"))?;
    check_schema(context, found, expected_schema)?;
    let header: H = serde_json::from_value(raw).map_err(|e| Error::parse(format!("{context}:1"), e))?;
    let mut records = Vec::new();
    for (idx, line) in lines {
        let record = serde_json::from_str(line)
            .map_err(|e| Error::parse(format!("{context}:{}", idx + 1), e))?;
        records.push(record);
    }
    Ok((header, records))
}

pub fn read_jsonl<H: DeserializeOwned, R: DeserializeOwned>(
    path: &Path,
    expected_schema: &str,
) -> Result<(H, Vec<R>)> {
    let text = read_text(path)?;
    parse_jsonl(&text, &path.display().to_string(), expected_schema)
}
