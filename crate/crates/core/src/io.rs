//! On-disk formats: NDSIG signals, metrics CSV and 16-bit PGM previews.
//!
//! NDSIG layout:
//!
//! ```text
//! NDSIG1\n
//! dims: d1 d2 ... dN\n
//! dtype: f64le\n
//! <product(dims) * 8 bytes of row-major little-endian binary64>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::engine::{IterationRecord, IterationReport};
use crate::error::{Error, Result};
use crate::grid::{GridShape, Signal};

pub const NDSIG_MAGIC: &str = "NDSIG1";
pub const NDSIG_DTYPE: &str = "f64le";
pub const METRICS_HEADER: &str = "iteration,nmse_db,residual,contraction";

pub fn encode_signal(f: &Signal) -> Vec<u8> {
    let dims: Vec<String> = f.shape().dims().iter().map(|d| d.to_string()).collect();
    let header = format!(
        "{NDSIG_MAGIC}\ndims: {}\ndtype: {NDSIG_DTYPE}\n",
        dims.join(" ")
    );
    let mut out = Vec::with_capacity(header.len() + 8 * f.values().len());
    out.extend_from_slice(header.as_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Reads one `\n`-terminated header line starting at `offset`.
fn header_line(bytes: &[u8], offset: usize) -> Result<(&str, usize)> {
    let rest = &bytes[offset.min(bytes.len())..];
    let end = rest
        .iter()
        .take(256)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(offset as u64, "unterminated header line"))?;
    let line = std::str::from_utf8(&rest[..end])
        .map_err(|_| Error::format(offset as u64, "header line is not UTF-8"))?;
    Ok((line, offset + end + 1))
}

pub fn decode_signal(bytes: &[u8]) -> Result<Signal> {
    let (magic, next) = header_line(bytes, 0)?;
    if magic != NDSIG_MAGIC {
        return Err(Error::format(
            0,
            format!("expected magic {NDSIG_MAGIC:?}, found {magic:?}"),
        ));
    }
    let dims_at = next;
    let (dims_line, next) = header_line(bytes, dims_at)?;
    let dims_text = dims_line
        .strip_prefix("dims:")
        .ok_or_else(|| Error::format(dims_at as u64, "expected a 'dims:' line"))?;
    let dims = dims_text
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::format(dims_at as u64, format!("bad dimension: {e}")))?;
    let shape = GridShape::new(dims).map_err(|e| Error::format(dims_at as u64, e.to_string()))?;
    let dtype_at = next;
    let (dtype_line, payload_at) = header_line(bytes, dtype_at)?;
    if dtype_line.strip_prefix("dtype:").map(str::trim) != Some(NDSIG_DTYPE) {
        return Err(Error::format(
            dtype_at as u64,
            format!("expected 'dtype: {NDSIG_DTYPE}', found {dtype_line:?}"),
        ));
    }
    let expected = shape
        .len()
        .checked_mul(8)
        .ok_or_else(|| Error::format(dims_at as u64, "payload size overflows"))?;
    let payload = &bytes[payload_at..];
    if payload.len() < expected {
        return Err(Error::format(
            bytes.len() as u64,
            format!("payload truncated: {} of {expected} bytes", payload.len()),
        ));
    }
    if payload.len() > expected {
        return Err(Error::format(
            (payload_at + expected) as u64,
            format!(
                "payload has {} bytes but dims {shape} need {expected}",
                payload.len()
            ),
        ));
    }
    let mut values = Vec::with_capacity(shape.len());
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !v.is_finite() {
            return Err(Error::format(
                (payload_at + 8 * i) as u64,
                "non-finite sample",
            ));
        }
        values.push(v);
    }
    Signal::new(shape, values)
}

pub fn write_signal(f: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_signal(f)).map_err(|e| io_context(e, path))
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    decode_signal(&fs::read(path).map_err(|e| io_context(e, path))?)
}

fn format_number(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v:.15e}")
    }
}

pub fn metrics_csv(report: &IterationReport) -> String {
    let mut out = String::new();
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.iteration,
            r.nmse_db.map(format_number).unwrap_or_default(),
            format_number(r.residual),
            r.contraction.map(format_number).unwrap_or_default()
        );
    }
    out
}

pub fn write_metrics_csv(report: &IterationReport, path: impl AsRef<Path>) -> Result<()> {
    if report.records.is_empty() {
        return Err(Error::param("report has no records"));
    }
    let path = path.as_ref();
    fs::write(path, metrics_csv(report)).map_err(|e| io_context(e, path))
}

fn parse_optional(field: &str, offset: u64) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|e| Error::format(offset, format!("bad number '{field}': {e}")))
}

/// Reads back a metrics file written by [`write_metrics_csv`]. Errors name
/// the byte offset of the offending line.
pub fn parse_metrics_csv(text: &str) -> Result<Vec<IterationRecord>> {
    let mut offset = 0u64;
    let mut records = Vec::new();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let at = offset;
        offset += line.len() as u64;
        let line = line.trim_end_matches(['\n', '\r']);
        if i == 0 {
            if line != METRICS_HEADER {
                return Err(Error::format(
                    0,
                    format!("metrics header must be '{METRICS_HEADER}'"),
                ));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::format(
                at,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        records.push(IterationRecord {
            iteration: fields[0]
                .parse()
                .map_err(|e| Error::format(at, format!("bad iteration '{}': {e}", fields[0])))?,
            nmse_db: parse_optional(fields[1], at)?,
            residual: parse_optional(fields[2], at)?
                .ok_or_else(|| Error::format(at, "missing residual"))?,
            contraction: parse_optional(fields[3], at)?,
        });
    }
    if offset == 0 {
        return Err(Error::format(0, "empty metrics file"));
    }
    Ok(records)
}

pub fn encode_pgm(f: &Signal) -> Result<Vec<u8>> {
    let dims = f.shape().dims();
    if dims.len() != 2 {
        return Err(Error::param(format!(
            "PGM export needs a 2-D signal, got {} axes",
            dims.len()
        )));
    }
    let (rows, cols) = (dims[0], dims[1]);
    let mut out = format!("P5 {cols} {rows} 65535\n").into_bytes();
    let (lo, hi) = f
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    for &v in f.values() {
        let level: u16 = if hi > lo {
            ((v - lo) / (hi - lo) * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            32768
        };
        out.extend_from_slice(&level.to_be_bytes());
    }
    Ok(out)
}

/// Binary 16-bit PGM, samples mapped affinely from `[min, max]` to
/// `[0, 65535]`; constant signals render mid-gray.
pub fn export_pgm(f: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(f)?).map_err(|e| io_context(e, path))
}

pub(crate) fn io_context(err: io::Error, path: &Path) -> Error {
    Error::Io(io::Error::new(
        err.kind(),
        format!("{}: {err}", path.display()),
    ))
}
