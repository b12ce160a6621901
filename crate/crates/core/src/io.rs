//! File formats: instance JSON, sample CSV, dual observation CSV, reports.
//!
//! Every data file starts with a `#` header line carrying the SHA-256 of
//! the instance JSON it was produced from.

use crate::error::{Error, Result};
use crate::rlwe::{DualObservation, RlweSample};
use serde::{de::DeserializeOwned, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Hash of the compact JSON serialization.
pub fn instance_hash<T: Serialize>(params: &T) -> Result<String> {
    let bytes = serde_json::to_vec(params)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Parsed `# key=value ...` header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header {
    pub kind: String,
    pub fields: BTreeMap<String, String>,
}

impl Header {
    pub fn new(kind: &str, fields: &[(&str, String)]) -> Self {
        Header { kind: kind.into(), fields: fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect() }
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.fields.get(key).map(String::as_str).ok_or_else(|| Error::Format(format!("header lacks {key}")))
    }

    pub fn instance(&self) -> Result<&str> {
        self.get("instance")
    }

    /// Fails unless the embedded hash equals `expected`.
    pub fn check_instance(&self, expected: &str) -> Result<()> {
        let found = self.instance()?;
        if found != expected {
            return Err(Error::HashMismatch { expected: expected.into(), found: found.into() });
        }
        Ok(())
    }

    fn line(&self) -> String {
        let mut s = format!("# rlwe-forge {}", self.kind);
        for (k, v) in &self.fields {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }

    fn parse(line: &str) -> Result<Self> {
        let rest = line
            .strip_prefix("# rlwe-forge ")
            .ok_or_else(|| Error::Format("missing '# rlwe-forge' header".into()))?;
        let mut it = rest.split_whitespace();
        let kind = it.next().ok_or_else(|| Error::Format("empty header".into()))?.to_string();
        let mut fields = BTreeMap::new();
        for kv in it {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Format(format!("bad header field {kv}")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        Ok(Header { kind, fields })
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// One row per sample: the n coordinates of a, then the n of b.
pub fn write_samples(path: &Path, header: &Header, samples: &[RlweSample]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.line())?;
    for s in samples {
        writeln!(w, "{},{}", join(&s.a), join(&s.b))?;
    }
    w.flush()?;
    Ok(())
}

fn read_header(r: &mut impl BufRead) -> Result<Header> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    Header::parse(first.trim_end())
}

pub fn read_samples(path: &Path) -> Result<(Header, Vec<RlweSample>)> {
    let mut r = BufReader::new(fs::File::open(path)?);
    let header = read_header(&mut r)?;
    let n: usize = header.get("n")?.parse().map_err(|_| Error::Format("bad n".into()))?;
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<u64> = line
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("row {}: {e}", i + 1)))?;
        if v.len() != 2 * n {
            return Err(Error::Format(format!("row {} has {} fields, expected {}", i + 1, v.len(), 2 * n)));
        }
        out.push(RlweSample { a: v[..n].to_vec(), b: v[n..].to_vec() });
    }
    Ok((header, out))
}

/// One real per line, shortest round-trip decimal form.
pub fn write_dual(path: &Path, header: &Header, obs: &[DualObservation]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.line())?;
    for o in obs {
        writeln!(w, "{:?}", o.value)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dual(path: &Path) -> Result<(Header, Vec<DualObservation>)> {
    let mut r = BufReader::new(fs::File::open(path)?);
    let header = read_header(&mut r)?;
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let value = t.parse::<f64>().map_err(|e| Error::Format(format!("{t}: {e}")))?;
        out.push(DualObservation { value });
    }
    Ok((header, out))
}
