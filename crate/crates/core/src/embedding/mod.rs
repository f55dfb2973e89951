//! Embedding providers and vector arithmetic.

mod cache;
mod deterministic;
mod remote;
mod vector;

pub use cache::{CachedEmbedder, EmbeddingCache};
pub use deterministic::{embed_deterministic, fnv1a64, trigram_counts};
pub use remote::{Health, RemoteEmbedder};
pub use vector::{cosine, l2_distance, mean_vector, Cosine, EmbeddingVector, VectorError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid provider config: {0}")]
    InvalidConfig(String),
    #[error("embedding service unreachable after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("embedding service answered HTTP {status}: {message}")]
    Http { status: u16, message: String },
    #[error("dimension mismatch: expected {expected}, service returned {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("count mismatch: sent {expected} text(s), received {got} vector(s)")]
    CountMismatch { expected: usize, got: usize },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error("embedding cache {path}: {message}")]
    Cache { path: String, message: String },
}

pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;

    /// One vector per input, in input order.
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Deterministic,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub dim: usize,
    pub endpoint: Option<String>,
    pub normalize: bool,
    pub batch_size: usize,
    pub retries: u32,
    pub max_in_flight: usize,
    pub timeout_ms: u64,
    pub retry_backoff_ms: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Deterministic,
            dim: 1024,
            endpoint: None,
            normalize: true,
            batch_size: 32,
            retries: 3,
            max_in_flight: 1,
            timeout_ms: 30_000,
            retry_backoff_ms: 250,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::InvalidConfig(m.to_string()));
        if self.dim < 1 {
            return bad("dim must be at least 1");
        }
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1");
        }
        if self.max_in_flight < 1 {
            return bad("max_in_flight must be at least 1");
        }
        if self.kind == ProviderKind::Remote && self.endpoint.as_deref().is_none_or(str::is_empty) {
            return bad("remote provider needs an endpoint");
        }
        Ok(())
    }

    /// Settings that change vector values; used to key cached embeddings.
    pub fn fingerprint(&self) -> String {
        let kind = match self.kind {
            ProviderKind::Deterministic => "deterministic".to_string(),
            ProviderKind::Remote => format!("remote:{}", self.endpoint.as_deref().unwrap_or_default()),
        };
        format!("{kind};dim={};normalize={}", self.dim, self.normalize)
    }

    pub fn build(&self) -> Result<Box<dyn Embedder>, EmbedError> {
        self.validate()?;
        Ok(match self.kind {
            ProviderKind::Deterministic => Box::new(DeterministicEmbedder { dim: self.dim, normalize: self.normalize }),
            ProviderKind::Remote => Box::new(RemoteEmbedder::new(self)?),
        })
    }
}

/// Local provider backed by [`embed_deterministic`]; with `normalize` off it
/// returns raw trigram counts.
#[derive(Debug, Clone, Copy)]
pub struct DeterministicEmbedder {
    pub dim: usize,
    pub normalize: bool,
}

impl Embedder for DeterministicEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        Ok(texts
            .iter()
            .map(|t| if self.normalize { embed_deterministic(t, self.dim) } else { trigram_counts(t, self.dim) })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remote_requires_endpoint() {
        let cfg = ProviderConfig { kind: ProviderKind::Remote, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(EmbedError::InvalidConfig(_))));
        assert!(ProviderConfig { dim: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn deterministic_provider_preserves_order() {
        let p = ProviderConfig { dim: 64, ..Default::default() }.build().unwrap();
        let texts = vec!["ដាំស្វាយចន្ទី".to_string(), "".to_string(), "abcd".to_string()];
        let out = p.embed(&texts).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], embed_deterministic(&texts[0], 64));
        assert!(out[1].is_zero());
    }

    #[test]
    fn unnormalized_provider_returns_counts() {
        let p = DeterministicEmbedder { dim: 8, normalize: false };
        let v = &p.embed(&["aaaa".to_string()]).unwrap()[0];
        assert_eq!(v.values().iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn fingerprint_tracks_value_affecting_settings() {
        let a = ProviderConfig::default();
        let b = ProviderConfig { normalize: false, ..Default::default() };
        let c = ProviderConfig { batch_size: 7, ..Default::default() };
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), c.fingerprint());
    }
}
