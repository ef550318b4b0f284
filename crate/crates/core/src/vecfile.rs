//! Binary vector table shared with the external embedding exporter.
//!
//! Layout: 8-byte magic `EKFVEC01`, `u32` LE dim, `u32` LE row count, then
//! `count * dim` LE `f32` values. The sidecar index is text, one
//! `row_number<TAB>content_hash_hex` line per row.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"EKFVEC01";
const HEADER_LEN: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VecFileError {
    #[error("file too short for header ({0} bytes)")]
    Truncated(usize),
    #[error("bad magic, expected EKFVEC01")]
    BadMagic,
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("dim mismatch with header: body has {actual} bytes, header implies {expected}")]
    BodyLength { expected: u64, actual: u64 },
    #[error("row {row} has {len} values, table dim is {dim}")]
    RowLength { row: usize, len: usize, dim: usize },
    #[error("too many rows for a 32-bit count")]
    TooManyRows,
    #[error("non-finite value in row {0}")]
    NonFinite(usize),
    #[error("index line {line}: {reason}")]
    Index { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dim: usize,
    values: Vec<f32>,
}

impl VectorTable {
    pub fn new(dim: usize) -> Result<Self, VecFileError> {
        if dim == 0 {
            return Err(VecFileError::ZeroDim);
        }
        Ok(Self { dim, values: Vec::new() })
    }

    pub fn push(&mut self, row: &[f32]) -> Result<usize, VecFileError> {
        let idx = self.len();
        if row.len() != self.dim {
            return Err(VecFileError::RowLength { row: idx, len: row.len(), dim: self.dim });
        }
        if idx >= u32::MAX as usize {
            return Err(VecFileError::TooManyRows);
        }
        self.values.extend_from_slice(row);
        Ok(idx)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> Option<&[f32]> {
        self.values.get(i * self.dim..(i + 1) * self.dim)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.values.len() * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, VecFileError> {
        if bytes.len() < HEADER_LEN {
            return Err(VecFileError::Truncated(bytes.len()));
        }
        if &bytes[..8] != MAGIC {
            return Err(VecFileError::BadMagic);
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
        let dim = word(8) as usize;
        let count = word(12) as usize;
        if dim == 0 {
            return Err(VecFileError::ZeroDim);
        }
        let expected = dim as u64 * count as u64 * 4;
        let actual = (bytes.len() - HEADER_LEN) as u64;
        if expected != actual {
            return Err(VecFileError::BodyLength { expected, actual });
        }
        let values: Vec<f32> = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(VecFileError::NonFinite(pos / dim));
        }
        Ok(Self { dim, values })
    }
}

/// Parses the sidecar index into `(row, hash)` pairs.
pub fn parse_index(text: &str) -> Result<Vec<(usize, String)>, VecFileError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: &str| VecFileError::Index { line: line_no, reason: String::from(reason) };
        let (row, hash) = line.split_once('\t').ok_or_else(|| err("expected row<TAB>hash"))?;
        let row: usize = row.trim().parse().map_err(|_| err("row number is not an integer"))?;
        let hash = hash.trim();
        if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err("hash must be 64 hex characters"));
        }
        out.push((row, hash.to_ascii_lowercase()));
    }
    Ok(out)
}

pub fn render_index<'a>(hashes: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for (i, h) in hashes.into_iter().enumerate() {
        let _ = writeln!(out, "{i}\t{h}");
    }
    out
}
