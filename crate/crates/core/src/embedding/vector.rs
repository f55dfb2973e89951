use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("vector must have at least one component")]
    Empty,
    #[error("component {0} is not finite")]
    NonFinite(usize),
}

/// Dense embedding. Components are held as `f64` in memory; persisted index
/// rows are `f32`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = VectorError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.values
    }
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, VectorError> {
        if values.is_empty() {
            return Err(VectorError::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn from_f32(values: &[f32]) -> Result<Self, VectorError> {
        Self::new(values.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { values: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_f32(&self) -> Vec<f32> {
        self.values.iter().map(|&v| v as f32).collect()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Unit-length copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Self { values: self.values.iter().map(|v| v / n).collect() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect() }
    }
}

fn check_dims(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<(), VectorError> {
    if a.dim() != b.dim() {
        return Err(VectorError::DimMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// Cosine similarity; `degenerate` marks a zero-norm input, in which case
/// `value` is 0.0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub value: f64,
    pub degenerate: bool,
}

pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<Cosine, VectorError> {
    check_dims(a, b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Ok(Cosine { value: 0.0, degenerate: true });
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok(Cosine { value: (dot / (na * nb)).clamp(-1.0, 1.0), degenerate: false })
}

pub fn l2_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, VectorError> {
    check_dims(a, b)?;
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Componentwise mean.
pub fn mean_vector<'a>(vectors: impl IntoIterator<Item = &'a EmbeddingVector>) -> Result<EmbeddingVector, VectorError> {
    let mut iter = vectors.into_iter();
    let first = iter.next().ok_or(VectorError::Empty)?;
    let mut sum = first.values.clone();
    let mut count = 1usize;
    for v in iter {
        check_dims(first, v)?;
        for (s, x) in sum.iter_mut().zip(&v.values) {
            *s += x;
        }
        count += 1;
    }
    let n = count as f64;
    Ok(EmbeddingVector { values: sum.into_iter().map(|s| s / n).collect() })
}
