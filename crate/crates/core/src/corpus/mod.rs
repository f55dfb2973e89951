//! Document and QA-pair loading.
//!
//! Both inputs are JSONL, one object per line:
//!
//! ```text
//! corpus: {"id": "doc-1", "text": "...", "source": "manual.pdf"}
//! qa:     {"id": "q1", "question": "...", "answer": "..."}
//! ```
//!
//! Blank lines are skipped. Every text field passes through
//! [`normalize_text`] with the profile supplied by the caller.

mod script;

pub use script::{
    is_khmer, khmer_char_set, normalize_text, ProfileError, ScriptProfile, KHMER_BLOCK, KHMER_SYMBOLS_BLOCK, ZWSP,
};

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId { path: PathBuf, line: usize, id: String },
}

impl CorpusError {
    /// 1-based line number for per-line errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Io { .. } => None,
            CorpusError::Malformed { line, .. } | CorpusError::DuplicateId { line, .. } => Some(*line),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub source: String,
}

impl Document {
    /// Builds a document with normalized text.
    pub fn new(id: impl Into<String>, raw_text: &str, source: impl Into<String>, profile: &ScriptProfile) -> Self {
        Self { id: id.into(), text: normalize_text(raw_text, profile), source: source.into() }
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaPair {
    pub id: String,
    pub question: String,
    pub answer: String,
}

#[derive(Deserialize)]
struct DocumentLine {
    id: String,
    text: String,
    source: Option<String>,
}

#[derive(Deserialize)]
struct QaLine {
    id: String,
    question: String,
    answer: String,
}

fn read_jsonl<T, U>(
    path: &Path,
    mut convert: impl FnMut(T, usize) -> Result<U, String>,
    id_of: impl Fn(&U) -> &str,
) -> Result<Vec<U>, CorpusError>
where
    T: for<'de> Deserialize<'de>,
{
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| CorpusError::Malformed { path: path.to_path_buf(), line: line_no, message };
        let raw: T = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let item = convert(raw, line_no).map_err(malformed)?;
        let id = id_of(&item);
        if !seen.insert(id.to_string()) {
            return Err(CorpusError::DuplicateId { path: path.to_path_buf(), line: line_no, id: id.to_string() });
        }
        out.push(item);
    }
    Ok(out)
}

/// Loads a corpus JSONL file, preserving file order. `source` defaults to the
/// file path when a line omits it.
pub fn load_corpus(path: impl AsRef<Path>, profile: &ScriptProfile) -> Result<Vec<Document>, CorpusError> {
    let path = path.as_ref();
    let default_source = path.display().to_string();
    read_jsonl(
        path,
        |line: DocumentLine, _| {
            if line.id.is_empty() {
                return Err("document id is empty".to_string());
            }
            let source = line.source.unwrap_or_else(|| default_source.clone());
            Ok(Document::new(line.id, &line.text, source, profile))
        },
        |d| &d.id,
    )
}

/// Loads QA pairs; question and answer must be non-empty after normalization.
pub fn load_qa(path: impl AsRef<Path>, profile: &ScriptProfile) -> Result<Vec<QaPair>, CorpusError> {
    read_jsonl(
        path.as_ref(),
        |line: QaLine, _| {
            if line.id.is_empty() {
                return Err("qa id is empty".to_string());
            }
            let question = normalize_text(&line.question, profile);
            let answer = normalize_text(&line.answer, profile);
            if question.trim().is_empty() {
                return Err(format!("question of {:?} is empty", line.id));
            }
            if answer.trim().is_empty() {
                return Err(format!("answer of {:?} is empty", line.id));
            }
            Ok(QaPair { id: line.id, question, answer })
        },
        |q| &q.id,
    )
}
