use super::span::CharView;
use super::{assemble, Chunk, ChunkConfig, ChunkError, ChunkMethod};
use crate::corpus::Document;

const TERMINATORS: [char; 5] = ['\u{17D4}', '\u{17D5}', '.', '!', '?'];

/// Sentence spans over scalar offsets. A sentence ends after a terminator
/// that is followed by whitespace or the end of text; text after the last
/// terminator forms a final sentence. Whitespace-only spans are dropped.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, &c) in chars.iter().enumerate() {
        let at_end = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
        if TERMINATORS.contains(&c) && at_end {
            spans.push((start, i + 1));
            start = i + 1;
        }
    }
    if start < chars.len() {
        spans.push((start, chars.len()));
    }
    spans.retain(|&(a, b)| chars[a..b].iter().any(|c| !c.is_whitespace()));
    spans
}

/// Windows of `cfg.sentences_per_chunk` sentences; consecutive windows share
/// `cfg.sentence_overlap` sentences and the last window may be shorter.
pub fn chunk_sentence(doc: &Document, cfg: &ChunkConfig) -> Result<Vec<Chunk>, ChunkError> {
    cfg.validate()?;
    let sentences = sentence_spans(&doc.text);
    let step = cfg.sentences_per_chunk - cfg.sentence_overlap;
    let mut spans = Vec::new();
    let mut first = 0;
    while first < sentences.len() {
        let last = (first + cfg.sentences_per_chunk).min(sentences.len());
        spans.push((sentences[first].0, sentences[last - 1].1));
        if last == sentences.len() {
            break;
        }
        first += step;
    }
    let view = CharView::new(&doc.text);
    Ok(assemble(&view, doc, ChunkMethod::SentenceBased, &spans))
}
