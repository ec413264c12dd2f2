//! File encodings for signals and sample payloads: raw little-endian
//! `f64`, or CSV with 17 significant digits (one value per line).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("raw sample data has {0} bytes, not a multiple of 8")]
    TruncatedRaw(usize),
    #[error("line {line}: cannot parse `{text}` as a number")]
    BadNumber { line: usize, text: String },
    #[error("unknown format `{0}` (expected raw or csv)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleFormat {
    #[default]
    Raw,
    Csv,
}

impl FromStr for SampleFormat {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(SampleFormat::Raw),
            "csv" => Ok(SampleFormat::Csv),
            other => Err(FormatError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for SampleFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleFormat::Raw => "raw",
            SampleFormat::Csv => "csv",
        })
    }
}

/// Formats a value with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn encode_raw(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_raw(bytes: &[u8]) -> Result<Vec<f64>, FormatError> {
    if bytes.len() % 8 != 0 {
        return Err(FormatError::TruncatedRaw(bytes.len()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
}

pub fn encode_csv(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for &v in values {
        out.push_str(&format_value(v));
        out.push('\n');
    }
    out
}

/// Parses values separated by newlines or commas; blank lines and lines
/// starting with `#` are skipped.
pub fn decode_csv(text: &str) -> Result<Vec<f64>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for field in line.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            let v = field.parse().map_err(|_| FormatError::BadNumber { line: i + 1, text: field.to_string() })?;
            out.push(v);
        }
    }
    Ok(out)
}

pub fn encode(values: &[f64], format: SampleFormat) -> Vec<u8> {
    match format {
        SampleFormat::Raw => encode_raw(values),
        SampleFormat::Csv => encode_csv(values).into_bytes(),
    }
}

pub fn decode(bytes: &[u8], format: SampleFormat) -> Result<Vec<f64>, FormatError> {
    match format {
        SampleFormat::Raw => decode_raw(bytes),
        SampleFormat::Csv => decode_csv(&String::from_utf8_lossy(bytes)),
    }
}
