//! Sentence vectors behind a provider interface, and cosine similarity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hash::sha256_bytes;
use crate::text::{normalize_text, text_key};
use crate::vecfile::{parse_index, VecFileError, VectorTable};

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("vector is empty")]
    Empty,
    #[error("vector contains a non-finite value")]
    NonFinite,
    #[error("hash provider needs dim >= 8, got {0}")]
    DimTooSmall(usize),
    #[error("no stored vector for text hash {0}")]
    UnknownText(String),
    #[error("index row {row} out of range for {rows} stored rows")]
    IndexRow { row: usize, rows: usize },
    #[error("hash {0} listed twice in index")]
    DuplicateHash(String),
    #[error(transparent)]
    File(#[from] VecFileError),
}

/// A finite, nonempty `f32` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|&v| f64::from(v) * f64::from(v)).sum())
    }
}

/// Source of sentence vectors. Implementations must be deterministic and
/// return vectors of [`EmbeddingProvider::dim`] components.
pub trait EmbeddingProvider {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        (**self).embed(text)
    }
}

/// Cosine similarity, accumulated in `f64` in index order and clamped to
/// `[-1, 1]`. Exactly symmetric.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimMismatch(a.dim(), b.dim()));
    }
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.0.iter().zip(&b.0) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot / (libm::sqrt(na) * libm::sqrt(nb))).clamp(-1.0, 1.0))
}

/// Deterministic test double: unit vectors drawn from a ChaCha stream seeded
/// by the hash of the normalized text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashProvider {
    dim: usize,
    seed: u64,
}

impl HashProvider {
    pub fn with_seed(dim: usize, seed: u64) -> Result<Self, EmbeddingError> {
        if dim < 8 {
            return Err(EmbeddingError::DimTooSmall(dim));
        }
        Ok(Self { dim, seed })
    }
}

pub fn hash_provider(dim: usize) -> Result<HashProvider, EmbeddingError> {
    HashProvider::with_seed(dim, 0)
}

impl EmbeddingProvider for HashProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        let norm_text = normalize_text(text);
        let seed = sha256_bytes(&[b"ekf-hash-provider", &self.seed.to_le_bytes(), norm_text.as_bytes()]);
        let mut rng = ChaCha8Rng::from_seed(seed);
        let raw: Vec<f64> = (0..self.dim)
            .map(|_| f64::from(rng.next_u32()) / f64::from(u32::MAX) * 2.0 - 1.0)
            .collect();
        let norm = libm::sqrt(raw.iter().map(|v| v * v).sum());
        let values = if norm == 0.0 {
            let mut v = alloc::vec![0.0f32; self.dim];
            v[0] = 1.0;
            v
        } else {
            raw.iter().map(|v| (v / norm) as f32).collect()
        };
        EmbeddingVector::new(values)
    }
}

/// Precomputed vectors keyed by the content hash of the normalized text.
#[derive(Debug, Clone)]
pub struct StoredVectors {
    table: VectorTable,
    by_hash: BTreeMap<String, usize>,
}

impl StoredVectors {
    pub fn from_parts(table: VectorTable, index_text: &str) -> Result<Self, EmbeddingError> {
        let rows = table.len();
        let mut by_hash = BTreeMap::new();
        for (row, hash) in parse_index(index_text)? {
            if row >= rows {
                return Err(EmbeddingError::IndexRow { row, rows });
            }
            if by_hash.insert(hash.clone(), row).is_some() {
                return Err(EmbeddingError::DuplicateHash(hash));
            }
        }
        Ok(Self { table, by_hash })
    }

    /// Builds a store from `(text, vector)` pairs; later duplicates of the same
    /// normalized text are ignored.
    pub fn from_texts<'a, I>(dim: usize, items: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (&'a str, &'a [f32])>,
    {
        let mut table = VectorTable::new(dim)?;
        let mut by_hash = BTreeMap::new();
        for (text, v) in items {
            let key = text_key(text);
            if by_hash.contains_key(&key) {
                continue;
            }
            EmbeddingVector::new(v.to_vec())?;
            let row = table.push(v)?;
            by_hash.insert(key, row);
        }
        Ok(Self { table, by_hash })
    }

    pub fn table(&self) -> &VectorTable {
        &self.table
    }

    /// Hashes in row order, for writing the sidecar index.
    pub fn hashes_by_row(&self) -> Vec<&str> {
        let mut rows: Vec<(usize, &str)> = self.by_hash.iter().map(|(h, &r)| (r, h.as_str())).collect();
        rows.sort_unstable();
        rows.into_iter().map(|(_, h)| h).collect()
    }

    pub fn len(&self) -> usize {
        self.by_hash.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_hash.is_empty()
    }
}

impl EmbeddingProvider for StoredVectors {
    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        let key = text_key(text);
        let row = self.by_hash.get(&key).ok_or(EmbeddingError::UnknownText(key))?;
        EmbeddingVector::new(self.table.row(*row).expect("index validated").to_vec())
    }
}
