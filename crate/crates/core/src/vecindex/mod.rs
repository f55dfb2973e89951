//! Exact flat L2 index.
//!
//! Rows are stored as `f32`. A query is rounded to `f32` before scanning so
//! that a query equal to a stored row scores exactly 0; squared differences
//! accumulate in `f64`. Hits are ordered by distance, then by key.

mod persist;

pub use persist::{decode, encode, load_index, save_index, FORMAT_VERSION, MAGIC};

use std::cmp::Ordering;
use std::collections::HashSet;

use thiserror::Error;

use crate::embedding::EmbeddingVector;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("dimension mismatch: index has {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("unsupported index format version {0}")]
    Version(u16),
    #[error("corrupt index file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub key: String,
    pub distance: f64,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatIndex {
    dim: usize,
    keys: Vec<String>,
    rows: Vec<f32>,
    normalized: bool,
}

impl FlatIndex {
    /// Builds an index in insertion order. An empty entry list yields an
    /// empty index of dimension 0 that accepts any query.
    pub fn build(entries: Vec<(String, EmbeddingVector)>, normalized: bool) -> Result<Self, IndexError> {
        let dim = entries.first().map_or(0, |(_, v)| v.dim());
        let mut seen = HashSet::with_capacity(entries.len());
        let mut keys = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len() * dim);
        for (key, v) in entries {
            if v.dim() != dim {
                return Err(IndexError::DimMismatch { expected: dim, got: v.dim() });
            }
            if !seen.insert(key.clone()) {
                return Err(IndexError::DuplicateKey(key));
            }
            rows.extend(v.to_f32());
            keys.push(key);
        }
        Ok(Self { dim, keys, rows, normalized })
    }

    pub(crate) fn from_parts(dim: usize, keys: Vec<String>, rows: Vec<f32>, normalized: bool) -> Self {
        debug_assert_eq!(rows.len(), keys.len() * dim);
        Self { dim, keys, rows, normalized }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub(crate) fn raw_rows(&self) -> &[f32] {
        &self.rows
    }

    /// Whether rows were unit-normalized when the index was built.
    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_vector(&self, i: usize) -> EmbeddingVector {
        EmbeddingVector::from_f32(self.row(i)).expect("stored rows are finite and non-empty")
    }

    /// The `min(k, len)` nearest rows by exhaustive scan.
    pub fn search(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<Hit>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        if self.is_empty() {
            return Ok(Vec::new());
        }
        if query.dim() != self.dim {
            return Err(IndexError::DimMismatch { expected: self.dim, got: query.dim() });
        }
        let q = query.to_f32();
        let mut scored: Vec<(f64, usize)> = (0..self.len()).map(|i| (distance(&q, self.row(i)), i)).collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then_with(|| self.keys[a.1].cmp(&self.keys[b.1]))
        };
        let k = k.min(scored.len());
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(order);
        Ok(scored.into_iter().map(|(distance, row)| Hit { key: self.keys[row].clone(), distance, row }).collect())
    }
}

fn distance(q: &[f32], row: &[f32]) -> f64 {
    q.iter()
        .zip(row)
        .map(|(&a, &b)| {
            let d = f64::from(a) - f64::from(b);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub fn build_index(entries: Vec<(String, EmbeddingVector)>, normalized: bool) -> Result<FlatIndex, IndexError> {
    FlatIndex::build(entries, normalized)
}
