//! Content-addressed embedding store, persisted as JSONL
//! `{"key": str, "vector": [float]}` lines sorted by key.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EmbedError, Embedder, EmbeddingVector};

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    vector: EmbeddingVector,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingCache {
    entries: BTreeMap<String, EmbeddingVector>,
}

impl EmbeddingCache {
    /// SHA-256 of the provider fingerprint and the text.
    pub fn key(fingerprint: &str, text: &str) -> String {
        let mut h = Sha256::new();
        h.update(fingerprint.as_bytes());
        h.update([0u8]);
        h.update(text.as_bytes());
        format!("{:x}", h.finalize())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&EmbeddingVector> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: String, vector: EmbeddingVector) {
        self.entries.insert(key, vector);
    }

    /// Loads a store; a missing file is an empty store.
    pub fn load(path: &Path) -> Result<Self, EmbedError> {
        let err = |message: String| EmbedError::Cache { path: path.display().to_string(), message };
        let content = match fs::read_to_string(path) {
            Ok(c) => c,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(e) => return Err(err(e.to_string())),
        };
        let mut entries = BTreeMap::new();
        for (i, line) in content.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let e: Entry = serde_json::from_str(line).map_err(|e| err(format!("line {}: {e}", i + 1)))?;
            entries.insert(e.key, e.vector);
        }
        Ok(Self { entries })
    }

    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        for (key, vector) in &self.entries {
            let line = serde_json::to_string(&Entry { key: key.clone(), vector: vector.clone() })?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Wraps a provider so repeated texts are embedded once.
pub struct CachedEmbedder {
    inner: Box<dyn Embedder>,
    fingerprint: String,
    cache: Mutex<EmbeddingCache>,
}

impl CachedEmbedder {
    pub fn new(inner: Box<dyn Embedder>, fingerprint: String, cache: EmbeddingCache) -> Self {
        Self { inner, fingerprint, cache: Mutex::new(cache) }
    }

    pub fn into_cache(self) -> EmbeddingCache {
        self.cache.into_inner().expect("cache lock poisoned")
    }
}

impl Embedder for CachedEmbedder {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let keys: Vec<String> = texts.iter().map(|t| EmbeddingCache::key(&self.fingerprint, t)).collect();
        let mut cache = self.cache.lock().expect("cache lock poisoned");
        let mut missing: Vec<String> = Vec::new();
        let mut missing_keys: Vec<&String> = Vec::new();
        for (key, text) in keys.iter().zip(texts) {
            if cache.get(key).is_none() && !missing_keys.contains(&key) {
                missing.push(text.clone());
                missing_keys.push(key);
            }
        }
        if !missing.is_empty() {
            let vectors = self.inner.embed(&missing)?;
            if vectors.len() != missing.len() {
                return Err(EmbedError::CountMismatch { expected: missing.len(), got: vectors.len() });
            }
            for (key, v) in missing_keys.into_iter().zip(vectors) {
                cache.insert(key.clone(), v);
            }
        }
        Ok(keys.iter().map(|k| cache.get(k).expect("just inserted").clone()).collect())
    }
}
