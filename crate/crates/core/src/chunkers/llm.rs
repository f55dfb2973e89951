//! LLM-guided chunking over a verbatim-echo protocol.
//!
//! The model is asked to reproduce the document unchanged and insert
//! [`CHUNK_DELIMITER`] wherever a new semantic unit begins. The reply is
//! accepted only if, with delimiters removed, its non-whitespace scalars equal
//! the document's; each part is then mapped back to a source span. Any client
//! error (after retries), an empty reply, or a reconstruction mismatch falls
//! back to recursive chunking with `fallback` set on every chunk.

use std::time::Duration;

use log::warn;
use thiserror::Error;

use super::recursive::chunk_recursive;
use super::span::CharView;
use super::{assemble, Chunk, ChunkConfig, ChunkError, ChunkMethod};
use crate::corpus::Document;

pub const CHUNK_DELIMITER: &str = "<<<CHUNK>>>";
const DOC_OPEN: &str = "<<<DOCUMENT>>>\n";
const DOC_CLOSE: &str = "\n<<<END>>>";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("llm request timed out after {0:?}")]
    Timeout(Duration),
    #[error("llm transport error: {0}")]
    Transport(String),
    #[error("unknown llm spec {0:?} (expected mock:paragraph, mock:echo or mock:fail)")]
    UnknownSpec(String),
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, LlmError>;

    /// Extra attempts after a failed `complete` call.
    fn retries(&self) -> u32 {
        2
    }

    /// Per-request deadline the client enforces.
    fn timeout(&self) -> Duration {
        Duration::from_secs(60)
    }
}

impl<F> LlmClient for F
where
    F: Fn(&str) -> Result<String, LlmError> + Send + Sync,
{
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        self(prompt)
    }
}

pub fn build_prompt(text: &str) -> String {
    format!(
        "Split the document below into semantically coherent chunks.\n\
         Reproduce the document exactly, character for character, without adding, removing or \
         changing any text.\n\
         Insert the marker {CHUNK_DELIMITER} between passages wherever a new topic, step or idea begins.\n\
         Output only the document with markers.\n\n\
         {DOC_OPEN}{text}{DOC_CLOSE}\n"
    )
}

/// The document text embedded in a prompt built by [`build_prompt`].
fn prompt_document(prompt: &str) -> Option<&str> {
    let start = prompt.find(DOC_OPEN)? + DOC_OPEN.len();
    let end = prompt.rfind(DOC_CLOSE)?;
    prompt.get(start..end)
}

/// Echoes the document with a delimiter after every blank line.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParagraphLlm;

impl LlmClient for ParagraphLlm {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let doc = prompt_document(prompt).ok_or_else(|| LlmError::Transport("prompt has no document".into()))?;
        Ok(doc.split("\n\n").collect::<Vec<_>>().join(&format!("\n\n{CHUNK_DELIMITER}")))
    }
}

/// Echoes the document unchanged: one chunk per document.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoLlm;

impl LlmClient for EchoLlm {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        prompt_document(prompt).map(str::to_string).ok_or_else(|| LlmError::Transport("prompt has no document".into()))
    }
}

/// Always times out; exercises the fallback path.
#[derive(Debug, Clone, Copy, Default)]
pub struct FailingLlm;

impl LlmClient for FailingLlm {
    fn complete(&self, _prompt: &str) -> Result<String, LlmError> {
        Err(LlmError::Timeout(self.timeout()))
    }

    fn retries(&self) -> u32 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockLlm {
    Paragraph,
    Echo,
    Fail,
}

impl LlmClient for MockLlm {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        match self {
            MockLlm::Paragraph => ParagraphLlm.complete(prompt),
            MockLlm::Echo => EchoLlm.complete(prompt),
            MockLlm::Fail => FailingLlm.complete(prompt),
        }
    }

    fn retries(&self) -> u32 {
        match self {
            MockLlm::Fail => 0,
            _ => 2,
        }
    }
}

/// Parses `mock:paragraph`, `mock:echo` or `mock:fail`.
pub fn parse_mock_spec(spec: &str) -> Result<MockLlm, LlmError> {
    match spec {
        "mock:paragraph" => Ok(MockLlm::Paragraph),
        "mock:echo" => Ok(MockLlm::Echo),
        "mock:fail" => Ok(MockLlm::Fail),
        other => Err(LlmError::UnknownSpec(other.to_string())),
    }
}

enum Rejection {
    Client(LlmError),
    Empty,
    Mismatch,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::Client(e) => write!(f, "{e}"),
            Rejection::Empty => f.write_str("empty reply"),
            Rejection::Mismatch => f.write_str("reply does not reproduce the document"),
        }
    }
}

fn non_ws(s: &str) -> impl Iterator<Item = char> + '_ {
    s.chars().filter(|c| !c.is_whitespace())
}

/// Span partition of the document implied by the reply's parts.
fn locate(view: &CharView, reply: &str) -> Result<Vec<(usize, usize)>, Rejection> {
    let parts: Vec<&str> = reply.split(CHUNK_DELIMITER).collect();
    if parts.iter().all(|p| p.trim().is_empty()) {
        return Err(Rejection::Empty);
    }
    let source = view.chars();
    let reconstructed = parts.iter().flat_map(|p| non_ws(p));
    if !reconstructed.eq(source.iter().copied().filter(|c| !c.is_whitespace())) {
        return Err(Rejection::Mismatch);
    }

    let mut cuts = Vec::with_capacity(parts.len() + 1);
    cuts.push(0);
    let mut pos = 0;
    for part in &parts[..parts.len() - 1] {
        let mut need = non_ws(part).count();
        while need > 0 {
            if !source[pos].is_whitespace() {
                need -= 1;
            }
            pos += 1;
        }
        cuts.push(view.snap_forward(pos));
    }
    cuts.push(view.len());
    Ok(cuts.windows(2).filter(|w| w[0] < w[1]).map(|w| (w[0], w[1])).collect())
}

fn ask(client: &dyn LlmClient, prompt: &str) -> Result<String, LlmError> {
    let mut last = None;
    for _ in 0..=client.retries() {
        match client.complete(prompt) {
            Ok(reply) => return Ok(reply),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

pub fn chunk_llm(doc: &Document, client: &dyn LlmClient, cfg: &ChunkConfig) -> Result<Vec<Chunk>, ChunkError> {
    cfg.validate()?;
    let view = CharView::new(&doc.text);
    if view.len() == 0 {
        return Ok(Vec::new());
    }
    let outcome =
        ask(client, &build_prompt(&doc.text)).map_err(Rejection::Client).and_then(|reply| locate(&view, &reply));
    match outcome {
        Ok(spans) => Ok(assemble(&view, doc, ChunkMethod::LlmBased, &spans)),
        Err(why) => {
            warn!("llm chunking of {:?} rejected ({why}); using recursive fallback", doc.id);
            let mut chunks = chunk_recursive(doc, cfg)?;
            for c in &mut chunks {
                c.method = ChunkMethod::LlmBased;
                c.fallback = true;
            }
            Ok(chunks)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ScriptProfile;
    use std::sync::atomic::{AtomicU32, Ordering};

    fn doc(text: &str) -> Document {
        Document::new("d", text, "t", &ScriptProfile::for_chunking())
    }

    fn texts(chunks: &[Chunk]) -> Vec<&str> {
        chunks.iter().map(|c| c.text.as_str()).collect()
    }

    #[test]
    fn paragraph_mock_gives_one_chunk_per_paragraph() {
        let d = doc("ដាំស្វាយចន្ទី។\n\nថែរក្សាសួន៕\n\nស្រោចទឹក។");
        let chunks = chunk_llm(&d, &ParagraphLlm, &ChunkConfig::default()).unwrap();
        assert_eq!(texts(&chunks), vec!["ដាំស្វាយចន្ទី។", "ថែរក្សាសួន៕", "ស្រោចទឹក។"]);
        assert!(chunks.iter().all(|c| !c.fallback && c.method == ChunkMethod::LlmBased));
        assert_eq!(chunks[0].start, 0);
        assert_eq!(chunks[2].end, d.char_len());
        assert_eq!(chunks[0].end, chunks[1].start);
    }

    #[test]
    fn groups_instructions_where_the_model_splits() {
        let text = "Plant cashew trees. Water regularly. Protect crops. Spray pesticide.";
        let client = |prompt: &str| -> Result<String, LlmError> {
            let body = prompt_document(prompt).unwrap();
            Ok(body.replacen("regularly. ", &format!("regularly.\n{CHUNK_DELIMITER}"), 1))
        };
        let chunks = chunk_llm(&doc(text), &client, &ChunkConfig::default()).unwrap();
        assert_eq!(texts(&chunks), vec!["Plant cashew trees. Water regularly.", "Protect crops. Spray pesticide."]);
    }

    #[test]
    fn dropped_sentence_falls_back_to_recursive() {
        let text = "Plant cashew trees. Water regularly. Protect crops. Spray pesticide.";
        let client = |_: &str| -> Result<String, LlmError> {
            Ok(format!("Plant cashew trees. {CHUNK_DELIMITER}Protect crops. Spray pesticide."))
        };
        let cfg = ChunkConfig { max_chars: 30, overlap_chars: 5, ..Default::default() };
        let got = chunk_llm(&doc(text), &client, &cfg).unwrap();
        let reference = chunk_recursive(&doc(text), &cfg).unwrap();
        assert_eq!(got.len(), reference.len());
        for (g, r) in got.iter().zip(&reference) {
            assert_eq!((g.start, g.end, &g.text), (r.start, r.end, &r.text));
            assert!(g.fallback);
            assert_eq!(g.method, ChunkMethod::LlmBased);
        }
    }

    #[test]
    fn timeouts_retry_then_fall_back() {
        struct Flaky(AtomicU32);
        impl LlmClient for Flaky {
            fn complete(&self, _: &str) -> Result<String, LlmError> {
                self.0.fetch_add(1, Ordering::SeqCst);
                Err(LlmError::Timeout(Duration::from_millis(5)))
            }
            fn retries(&self) -> u32 {
                3
            }
        }
        let client = Flaky(AtomicU32::new(0));
        let chunks = chunk_llm(&doc("A. B."), &client, &ChunkConfig::default()).unwrap();
        assert_eq!(client.0.load(Ordering::SeqCst), 4);
        assert!(chunks.iter().all(|c| c.fallback));
    }

    #[test]
    fn succeeds_on_retry() {
        let calls = AtomicU32::new(0);
        let client = |prompt: &str| -> Result<String, LlmError> {
            if calls.fetch_add(1, Ordering::SeqCst) == 0 {
                Err(LlmError::Transport("reset".into()))
            } else {
                EchoLlm.complete(prompt)
            }
        };
        let chunks = chunk_llm(&doc("A. B."), &client, &ChunkConfig::default()).unwrap();
        assert_eq!(texts(&chunks), vec!["A. B."]);
        assert!(!chunks[0].fallback);
    }

    #[test]
    fn empty_reply_falls_back() {
        let client = |_: &str| -> Result<String, LlmError> { Ok("  \n".into()) };
        let chunks = chunk_llm(&doc("A. B."), &client, &ChunkConfig::default()).unwrap();
        assert!(chunks[0].fallback);
    }

    #[test]
    fn whitespace_differences_are_tolerated() {
        let client = |_: &str| -> Result<String, LlmError> { Ok(format!("  A.\n{CHUNK_DELIMITER}\nB.  \n")) };
        let chunks = chunk_llm(&doc("A. B."), &client, &ChunkConfig::default()).unwrap();
        assert_eq!(texts(&chunks), vec!["A.", "B."]);
        assert!(!chunks[0].fallback);
    }

    #[test]
    fn delimiter_inside_cluster_is_snapped() {
        // Delimiter between the consonant and its dependent vowel.
        let client = |_: &str| -> Result<String, LlmError> { Ok(format!("ក{CHUNK_DELIMITER}ា ខ")) };
        let chunks = chunk_llm(&doc("កា ខ"), &client, &ChunkConfig::default()).unwrap();
        assert_eq!(texts(&chunks), vec!["កា", "ខ"]);
    }

    #[test]
    fn mock_specs() {
        assert_eq!(parse_mock_spec("mock:paragraph").unwrap(), MockLlm::Paragraph);
        assert!(matches!(parse_mock_spec("gpt"), Err(LlmError::UnknownSpec(_))));
        let chunks = chunk_llm(&doc("A.\n\nB."), &MockLlm::Fail, &ChunkConfig::default()).unwrap();
        assert!(chunks[0].fallback);
    }
}
