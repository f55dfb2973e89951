//! Chunking-strategy benchmark toolkit for Khmer-script retrieval.
//!
//! The pipeline is corpus → chunk → embed → index → retrieve → score:
//!
//! - [`corpus`] loads JSONL documents and QA pairs and normalizes text.
//! - [`chunkers`] implements the four segmentation strategies (recursive,
//!   Khmer-aware, sentence windows, LLM-delimited) over codepoint spans.
//! - [`embedding`] provides the deterministic trigram embedder, the HTTP
//!   client for an external embedding service, and vector arithmetic.
//! - [`vecindex`] is an exact flat L2 index with a checksummed file format.
//! - [`metrics`] scores one retrieval: average L2, answer relevance,
//!   Khmer coverage and Khmer character IoU.
//! - [`evaluation`] runs k-fold aggregation, paired t-tests and renders
//!   the comparison table.

pub mod chunkers;
pub mod corpus;
pub mod embedding;
pub mod evaluation;
pub mod metrics;
pub mod vecindex;

pub use chunkers::{Chunk, ChunkConfig, ChunkMethod};
pub use corpus::{Document, QaPair, ScriptProfile};
pub use embedding::{EmbeddingVector, ProviderConfig};
pub use metrics::MetricRecord;
pub use vecindex::FlatIndex;
