use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::IncrementSample;

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct IncrementRow {
    z: f64,
}

pub fn increments_csv(values: &[f64]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for &z in values {
        w.serialize(IncrementRow { z })?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Reads a single-column `z` CSV.
pub fn parse_increments(text: &str) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.len() != 1 || headers.get(0).map(str::trim) != Some("z") {
        return Err(Error::Config(format!("increments file must have the single column `z`, found {headers:?}")));
    }
    let mut out = Vec::new();
    for row in r.deserialize::<IncrementRow>() {
        out.push(row?.z);
    }
    Ok(out)
}

pub fn read_increments(path: &Path, delta: f64) -> Result<IncrementSample> {
    let text = std::fs::read_to_string(path)?;
    IncrementSample::new(delta, parse_increments(&text)?)
}

/// One row of the raw Monte Carlo errors file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub replicate: usize,
    pub target: String,
    pub n: usize,
    pub error: f64,
}

pub fn errors_csv(rows: &[ErrorRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["replicate", "target", "n", "error"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increments_round_trip() {
        let v = vec![0.0, -1.5, 1e-17, 3.0_f64.sqrt()];
        let bytes = increments_csv(&v).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("z\n"));
        assert_eq!(parse_increments(&text).unwrap(), v);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(matches!(parse_increments("x\n1\n"), Err(Error::Config(_))));
        assert!(parse_increments("z\nabc\n").is_err());
        assert!(parse_increments("z\n").unwrap().is_empty());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_json(&p, &vec![1, 2]).unwrap();
        write_json(&p, &vec![3]).unwrap();
        let back: Vec<i32> = read_json(&p).unwrap();
        assert_eq!(back, vec![3]);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn errors_header() {
        let rows = vec![ErrorRow { replicate: 0, target: "lambda".into(), n: 10, error: 0.5 }];
        let text = String::from_utf8(errors_csv(&rows).unwrap()).unwrap();
        assert_eq!(text, "replicate,target,n,error\n0,lambda,10,0.5\n");
        let empty = String::from_utf8(errors_csv(&[]).unwrap()).unwrap();
        assert_eq!(empty, "replicate,target,n,error\n");
    }
}
