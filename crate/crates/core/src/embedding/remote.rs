//! Blocking client for the embedding wire protocol:
//!
//! ```text
//! POST /v1/embed  {"texts": [..], "normalize": bool}
//!   200 {"vectors": [[..]], "dim": int, "model": str}
//!   400 invalid input, 503 model not ready
//! GET /healthz   200 {"status": "ok", "dim": int}
//! ```
//!
//! Requests are batched by `batch_size` and up to `max_in_flight` batches run
//! concurrently; results are reassembled in request order. 5xx responses and
//! transport failures are retried, 4xx responses are not.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbedError, Embedder, EmbeddingVector, ProviderConfig};

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
    normalize: bool,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    dim: usize,
    #[serde(default)]
    #[allow(dead_code)]
    model: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Health {
    pub status: String,
    pub dim: usize,
}

pub struct RemoteEmbedder {
    base: String,
    agent: ureq::Agent,
    cfg: ProviderConfig,
}

impl RemoteEmbedder {
    pub fn new(cfg: &ProviderConfig) -> Result<Self, EmbedError> {
        cfg.validate()?;
        let endpoint = cfg
            .endpoint
            .as_deref()
            .ok_or_else(|| EmbedError::InvalidConfig("remote provider needs an endpoint".into()))?;
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_millis(cfg.timeout_ms)).build();
        Ok(Self { base: endpoint.trim_end_matches('/').to_string(), agent, cfg: cfg.clone() })
    }

    pub fn health(&self) -> Result<Health, EmbedError> {
        let url = format!("{}/healthz", self.base);
        match self.agent.get(&url).call() {
            Ok(resp) => resp.into_json().map_err(|e| EmbedError::Protocol(format!("bad health body: {e}"))),
            Err(ureq::Error::Status(status, resp)) => {
                Err(EmbedError::Http { status, message: resp.into_string().unwrap_or_default() })
            }
            Err(e) => Err(EmbedError::Transport { attempts: 1, message: e.to_string() }),
        }
    }

    fn post_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let url = format!("{}/v1/embed", self.base);
        let attempts = self.cfg.retries + 1;
        let mut last = String::new();
        for attempt in 1..=attempts {
            if attempt > 1 && self.cfg.retry_backoff_ms > 0 {
                thread::sleep(Duration::from_millis(self.cfg.retry_backoff_ms * u64::from(attempt - 1)));
            }
            let req = EmbedRequest { texts, normalize: self.cfg.normalize };
            match self.agent.post(&url).send_json(&req) {
                Ok(resp) => {
                    let body: EmbedResponse =
                        resp.into_json().map_err(|e| EmbedError::Protocol(format!("bad embed body: {e}")))?;
                    return self.check(texts.len(), body);
                }
                Err(ureq::Error::Status(status, resp)) if status >= 500 => {
                    last = format!("HTTP {status}: {}", resp.into_string().unwrap_or_default());
                }
                Err(ureq::Error::Status(status, resp)) => {
                    return Err(EmbedError::Http { status, message: resp.into_string().unwrap_or_default() });
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(EmbedError::Transport { attempts, message: last })
    }

    fn check(&self, expected: usize, body: EmbedResponse) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if body.dim != self.cfg.dim {
            return Err(EmbedError::DimensionMismatch { expected: self.cfg.dim, got: body.dim });
        }
        if body.vectors.len() != expected {
            return Err(EmbedError::CountMismatch { expected, got: body.vectors.len() });
        }
        body.vectors
            .into_iter()
            .map(|values| {
                if values.len() != body.dim {
                    return Err(EmbedError::DimensionMismatch { expected: body.dim, got: values.len() });
                }
                let v = EmbeddingVector::new(values)?;
                Ok(if self.cfg.normalize { v.normalized() } else { v })
            })
            .collect()
    }
}

impl Embedder for RemoteEmbedder {
    fn dim(&self) -> usize {
        self.cfg.dim
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let batches: Vec<&[String]> = texts.chunks(self.cfg.batch_size).collect();
        let mut out = Vec::with_capacity(texts.len());
        for group in batches.chunks(self.cfg.max_in_flight) {
            let results: Vec<Result<Vec<EmbeddingVector>, EmbedError>> = thread::scope(|s| {
                let handles: Vec<_> = group.iter().map(|batch| s.spawn(move || self.post_batch(batch))).collect();
                handles.into_iter().map(|h| h.join().expect("embed worker panicked")).collect()
            });
            for r in results {
                out.extend(r?);
            }
        }
        Ok(out)
    }
}
