//! The four chunking strategies.
//!
//! Every strategy returns [`Chunk`]s whose `start..end` is a span of Unicode
//! scalar offsets into the document text, before whitespace trimming. The
//! chunk `text` is that span trimmed at both ends. Chunk boundaries never
//! split an extended grapheme cluster, so Khmer dependent vowels and signs
//! stay attached to their base consonant.

mod khmer;
mod llm;
mod recursive;
mod sentence;
mod span;
mod splitter;

pub use khmer::chunk_khmer_aware;
pub use llm::{
    build_prompt, chunk_llm, parse_mock_spec, EchoLlm, FailingLlm, LlmClient, LlmError, MockLlm, ParagraphLlm,
    CHUNK_DELIMITER,
};
pub use recursive::chunk_recursive;
pub use sentence::{chunk_sentence, sentence_spans};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use span::CharView;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChunkError {
    #[error("invalid chunk config: {0}")]
    InvalidConfig(String),
    #[error("unknown chunk method {0:?} (expected one of: recursive, khmer_aware, sentence, llm)")]
    UnknownMethod(String),
    #[error("the llm method needs an LLM client")]
    MissingLlm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkMethod {
    Recursive,
    KhmerAware,
    #[serde(rename = "sentence")]
    SentenceBased,
    #[serde(rename = "llm")]
    LlmBased,
}

impl ChunkMethod {
    pub const ALL: [ChunkMethod; 4] =
        [ChunkMethod::Recursive, ChunkMethod::KhmerAware, ChunkMethod::SentenceBased, ChunkMethod::LlmBased];

    /// Identifier used in configs, file names and JSON.
    pub fn name(self) -> &'static str {
        match self {
            ChunkMethod::Recursive => "recursive",
            ChunkMethod::KhmerAware => "khmer_aware",
            ChunkMethod::SentenceBased => "sentence",
            ChunkMethod::LlmBased => "llm",
        }
    }

    /// Row label in rendered reports.
    pub fn label(self) -> &'static str {
        match self {
            ChunkMethod::Recursive => "Recursive",
            ChunkMethod::KhmerAware => "Khmer-Aware",
            ChunkMethod::SentenceBased => "Sentence-based",
            ChunkMethod::LlmBased => "LLM",
        }
    }
}

impl fmt::Display for ChunkMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChunkMethod {
    type Err = ChunkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChunkMethod::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| ChunkError::UnknownMethod(s.to_string()))
    }
}

pub const DEFAULT_SEPARATORS: [&str; 8] = ["\n\n", "\n", "។", ".", "!", "?", " ", ""];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChunkConfig {
    pub max_chars: usize,
    pub overlap_chars: usize,
    pub sentences_per_chunk: usize,
    pub sentence_overlap: usize,
    pub khmer_aware_max_chars: usize,
    /// Recursive separator hierarchy, coarsest first. An empty string means
    /// "split between grapheme clusters"; it is implied at the end if absent.
    pub separators: Vec<String>,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self {
            max_chars: 300,
            overlap_chars: 50,
            sentences_per_chunk: 5,
            sentence_overlap: 1,
            khmer_aware_max_chars: 800,
            separators: DEFAULT_SEPARATORS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ChunkConfig {
    pub fn validate(&self) -> Result<(), ChunkError> {
        let bad = |m: String| Err(ChunkError::InvalidConfig(m));
        if self.max_chars < 1 {
            return bad("max_chars must be at least 1".into());
        }
        if self.overlap_chars >= self.max_chars {
            return bad(format!("overlap_chars ({}) must be below max_chars ({})", self.overlap_chars, self.max_chars));
        }
        if self.sentences_per_chunk < 1 {
            return bad("sentences_per_chunk must be at least 1".into());
        }
        if self.sentence_overlap >= self.sentences_per_chunk {
            return bad(format!(
                "sentence_overlap ({}) must be below sentences_per_chunk ({})",
                self.sentence_overlap, self.sentences_per_chunk
            ));
        }
        if self.khmer_aware_max_chars < 1 {
            return bad("khmer_aware_max_chars must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub seq: usize,
    pub method: ChunkMethod,
    pub text: String,
    pub start: usize,
    pub end: usize,
    /// Set when the LLM strategy fell back to recursive splitting.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

impl Chunk {
    /// Index key, unique within one method's chunk set.
    pub fn key(&self) -> String {
        format!("{}#{}", self.doc_id, self.seq)
    }
}

/// Turns raw spans into numbered chunks. Whitespace-only spans are dropped.
fn assemble(view: &CharView, doc: &Document, method: ChunkMethod, spans: &[(usize, usize)]) -> Vec<Chunk> {
    spans
        .iter()
        .filter_map(|&(start, end)| {
            let (a, b) = view.trim(start, end)?;
            Some((start, end, view.slice(a, b)))
        })
        .enumerate()
        .map(|(seq, (start, end, text))| Chunk {
            doc_id: doc.id.clone(),
            seq,
            method,
            text,
            start,
            end,
            fallback: false,
        })
        .collect()
}

/// Runs one strategy over one document. `llm` is required for
/// [`ChunkMethod::LlmBased`] and ignored otherwise.
pub fn chunk_document(
    doc: &Document,
    method: ChunkMethod,
    cfg: &ChunkConfig,
    llm: Option<&dyn LlmClient>,
) -> Result<Vec<Chunk>, ChunkError> {
    match method {
        ChunkMethod::Recursive => chunk_recursive(doc, cfg),
        ChunkMethod::KhmerAware => chunk_khmer_aware(doc, cfg),
        ChunkMethod::SentenceBased => chunk_sentence(doc, cfg),
        ChunkMethod::LlmBased => chunk_llm(doc, llm.ok_or(ChunkError::MissingLlm)?, cfg),
    }
}

/// Chunks every document in order and concatenates the results.
pub fn chunk_corpus(
    docs: &[Document],
    method: ChunkMethod,
    cfg: &ChunkConfig,
    llm: Option<&dyn LlmClient>,
) -> Result<Vec<Chunk>, ChunkError> {
    let mut out = Vec::new();
    for doc in docs {
        out.extend(chunk_document(doc, method, cfg, llm)?);
    }
    Ok(out)
}
