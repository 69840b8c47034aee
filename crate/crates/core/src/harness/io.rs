//! Matrix files.
//!
//! * CSV: one matrix row per line, comma-separated decimal floats, no
//!   header. Values are written in shortest round-trip form.
//! * raw: the magic bytes `L1IN`, the dimensions `M` and `N` as
//!   little-endian `u64`, then `M·N` little-endian IEEE-754 doubles in
//!   row-major order.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::GroupMatrix;

pub const RAW_MAGIC: &[u8; 4] = b"L1IN";
const RAW_HEADER: usize = 4 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Raw,
}

impl MatrixFormat {
    /// `.csv` (any case) is CSV, everything else raw.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Raw,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(MatrixFormat::Csv),
            "raw" | "bin" => Ok(MatrixFormat::Raw),
            other => Err(Error::invalid(format!("unknown matrix format `{other}`"))),
        }
    }
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<GroupMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    match format {
        MatrixFormat::Csv => parse_csv(&bytes, path),
        MatrixFormat::Raw => decode_raw(&bytes, path),
    }
}

pub fn write_matrix(path: &Path, matrix: &GroupMatrix, format: MatrixFormat) -> Result<()> {
    let bytes = match format {
        MatrixFormat::Csv => encode_csv(matrix),
        MatrixFormat::Raw => encode_raw(matrix),
    };
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn encode_csv(matrix: &GroupMatrix) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for row in matrix.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn parse_csv(bytes: &[u8], path: &Path) -> Result<GroupMatrix> {
    let parse_err = |location: String, message: String| Error::Parse {
        path: path.to_path_buf(),
        location,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(format!("line {line}"), e.to_string())
        })?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(rows as u64 + 1);
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(n) if n != record.len() => {
                return Err(parse_err(
                    format!("line {line}"),
                    format!("expected {n} fields, found {}", record.len()),
                ))
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                parse_err(
                    format!("line {line}, column {}", j + 1),
                    format!("`{field}` is not a number"),
                )
            })?;
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err("line 1".into(), "no data".into()))?;
    GroupMatrix::from_vec(rows, cols, data)
}

pub fn encode_raw(matrix: &GroupMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER + 8 * matrix.as_slice().len());
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&(matrix.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(matrix.cols() as u64).to_le_bytes());
    for v in matrix.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_raw(bytes: &[u8], path: &Path) -> Result<GroupMatrix> {
    let parse_err = |offset: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        location: format!("offset {offset}"),
        message,
    };
    if bytes.len() < RAW_HEADER {
        return Err(parse_err(
            bytes.len(),
            format!("file is {} bytes, header needs {RAW_HEADER}", bytes.len()),
        ));
    }
    if &bytes[..4] != RAW_MAGIC {
        return Err(parse_err(
            0,
            format!("magic mismatch: expected `L1IN`, found {:?}", &bytes[..4]),
        ));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let (m, n) = (read_u64(4), read_u64(12));
    let count = usize::try_from(m)
        .ok()
        .zip(usize::try_from(n).ok())
        .and_then(|(m, n)| m.checked_mul(n))
        .and_then(|c| c.checked_mul(8).map(|b| (c, b)));
    let (count, payload) = count.ok_or_else(|| {
        Error::invalid(format!("dimensions {m}x{n} overflow the addressable size"))
    })?;
    let body = &bytes[RAW_HEADER..];
    if body.len() != payload {
        return Err(parse_err(
            RAW_HEADER + body.len().min(payload),
            format!(
                "{m}x{n} needs {payload} payload bytes, found {}",
                body.len()
            ),
        ));
    }
    let data = body
        .chunks_exact(8)
        .take(count)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    GroupMatrix::from_vec(m as usize, n as usize, data)
}
