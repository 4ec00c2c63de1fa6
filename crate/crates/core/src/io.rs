//! Sample ingestion: CSV (one value per line, `#` comments) and raw
//! little-endian 64-bit float streams.

use std::io::{BufRead, Read};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn read_csv_sample<T: Real, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| {
            Error::parse(format!("line {}: bad number `{trimmed}`", lineno + 1))
        })?;
        if !v.is_finite() {
            return Err(Error::parse(format!("line {}: non-finite value", lineno + 1)));
        }
        out.push(T::of(v));
    }
    if out.is_empty() {
        return Err(Error::InsufficientSample {
            required: 1,
            actual: 0,
        });
    }
    Ok(out)
}

pub fn read_binary_sample<T: Real, R: Read>(mut reader: R) -> Result<Vec<T>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::parse(format!(
            "binary stream length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    let mut out = Vec::with_capacity(bytes.len() / 8);
    for chunk in bytes.chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().expect("chunk of 8"));
        if !v.is_finite() {
            return Err(Error::parse("binary stream contains a non-finite value".into()));
        }
        out.push(T::of(v));
    }
    if out.is_empty() {
        return Err(Error::InsufficientSample {
            required: 1,
            actual: 0,
        });
    }
    Ok(out)
}
