use super::span::CharView;
use super::splitter::{levels_from_separators, Splitter};
use super::{assemble, Chunk, ChunkConfig, ChunkError, ChunkMethod};
use crate::corpus::Document;

/// Separator-hierarchy splitting bounded by `cfg.max_chars` scalars, with up
/// to `cfg.overlap_chars` scalars shared between consecutive chunks.
pub fn chunk_recursive(doc: &Document, cfg: &ChunkConfig) -> Result<Vec<Chunk>, ChunkError> {
    cfg.validate()?;
    let view = CharView::new(&doc.text);
    let levels = levels_from_separators(&cfg.separators);
    let spans = Splitter { view: &view, levels: &levels, max: cfg.max_chars, overlap: cfg.overlap_chars }.split_all();
    Ok(assemble(&view, doc, ChunkMethod::Recursive, &spans))
}
