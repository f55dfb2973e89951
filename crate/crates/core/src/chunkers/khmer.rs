use super::span::CharView;
use super::splitter::{Level, Splitter};
use super::{assemble, Chunk, ChunkConfig, ChunkError, ChunkMethod};
use crate::corpus::Document;

/// Khmer sentence-final marks: khan and bariyoosan.
pub const KHMER_SENTENCE_MARKS: [&str; 2] = ["\u{17D4}", "\u{17D5}"];

fn khmer_levels() -> Vec<Level> {
    vec![
        Level::from_strs(&["\n\n"]),
        Level::from_strs(&["\n"]),
        Level::from_strs(&KHMER_SENTENCE_MARKS),
        // Fallbacks for a single sentence longer than the budget.
        Level::from_strs(&["\u{200B}"]),
        Level::from_strs(&[" "]),
        Level::Graphemes,
    ]
}

/// Paragraph, then line, then Khmer sentence-mark splitting; adjacent
/// segments are merged greedily up to `cfg.khmer_aware_max_chars`, without
/// overlap. A mark stays at the end of its segment.
pub fn chunk_khmer_aware(doc: &Document, cfg: &ChunkConfig) -> Result<Vec<Chunk>, ChunkError> {
    cfg.validate()?;
    let view = CharView::new(&doc.text);
    let levels = khmer_levels();
    let spans = Splitter { view: &view, levels: &levels, max: cfg.khmer_aware_max_chars, overlap: 0 }.split_all();
    Ok(assemble(&view, doc, ChunkMethod::KhmerAware, &spans))
}
