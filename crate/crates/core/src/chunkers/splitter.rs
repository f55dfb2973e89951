//! Hierarchical separator splitting with greedy merging, shared by the
//! recursive and Khmer-aware strategies.
//!
//! A span longer than the budget is cut at every occurrence of the first
//! separator level that has a usable split point inside it (the separator
//! stays with the preceding piece). Pieces within budget are greedily merged
//! back together, carrying up to `overlap` scalars of trailing pieces into
//! the next chunk; oversized pieces recurse into the next level. The final
//! level splits between grapheme clusters, and a single cluster larger than
//! the budget is cut per scalar so the budget always holds.

use std::collections::VecDeque;

use super::span::CharView;

pub(crate) enum Level {
    /// Any of these strings ends a piece.
    Separators(Vec<Vec<char>>),
    /// Between every grapheme cluster.
    Graphemes,
}

impl Level {
    pub(crate) fn from_strs<S: AsRef<str>>(seps: &[S]) -> Self {
        Level::Separators(seps.iter().map(|s| s.as_ref().chars().collect()).collect())
    }
}

/// Maps a flat separator list to levels, one separator per level. An empty
/// string becomes the grapheme level and ends the list; the grapheme level is
/// appended when missing.
pub(crate) fn levels_from_separators(seps: &[String]) -> Vec<Level> {
    let mut levels = Vec::new();
    for s in seps {
        if s.is_empty() {
            break;
        }
        levels.push(Level::from_strs(&[s]));
    }
    levels.push(Level::Graphemes);
    levels
}

pub(crate) struct Splitter<'a> {
    pub(crate) view: &'a CharView,
    pub(crate) levels: &'a [Level],
    pub(crate) max: usize,
    pub(crate) overlap: usize,
}

impl Splitter<'_> {
    pub(crate) fn split_all(&self) -> Vec<(usize, usize)> {
        if self.view.len() == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        self.split(0, self.view.len(), 0, &mut out);
        out
    }

    fn split(&self, start: usize, end: usize, level: usize, out: &mut Vec<(usize, usize)>) {
        if end - start <= self.max {
            out.push((start, end));
            return;
        }
        let Some((used, pieces)) = self.pieces_at(start, end, level) else {
            self.hard_split(start, end, out);
            return;
        };
        let mut good = Vec::new();
        for piece in pieces {
            if piece.1 - piece.0 <= self.max {
                good.push(piece);
                continue;
            }
            self.merge(&good, out);
            good.clear();
            self.split(piece.0, piece.1, used + 1, out);
        }
        self.merge(&good, out);
    }

    /// First level at or after `level` that cuts `[start, end)` into at least
    /// two pieces. `None` means the span is a single oversized cluster.
    fn pieces_at(&self, start: usize, end: usize, level: usize) -> Option<(usize, Vec<(usize, usize)>)> {
        for (idx, lvl) in self.levels.iter().enumerate().skip(level) {
            let pieces = match lvl {
                Level::Graphemes => self.view.clusters(start, end),
                Level::Separators(seps) => self.cut_at(start, end, seps),
            };
            if pieces.len() > 1 {
                return Some((idx, pieces));
            }
        }
        None
    }

    fn cut_at(&self, start: usize, end: usize, seps: &[Vec<char>]) -> Vec<(usize, usize)> {
        let chars = self.view.chars();
        let mut pieces = Vec::new();
        let mut piece_start = start;
        let mut i = start;
        while i < end {
            let hit = seps.iter().find(|s| !s.is_empty() && i + s.len() <= end && chars[i..i + s.len()] == s[..]);
            match hit {
                Some(sep) => {
                    let cut = i + sep.len();
                    if cut < end && self.view.is_boundary(cut) {
                        pieces.push((piece_start, cut));
                        piece_start = cut;
                    }
                    i = cut;
                }
                None => i += 1,
            }
        }
        pieces.push((piece_start, end));
        pieces
    }

    fn hard_split(&self, start: usize, end: usize, out: &mut Vec<(usize, usize)>) {
        let mut s = start;
        while s < end {
            let e = (s + self.max).min(end);
            out.push((s, e));
            s = e;
        }
    }

    /// Greedy merge of contiguous in-budget pieces.
    fn merge(&self, pieces: &[(usize, usize)], out: &mut Vec<(usize, usize)>) {
        let mut window: VecDeque<(usize, usize)> = VecDeque::new();
        let mut total = 0usize;
        for &piece in pieces {
            let len = piece.1 - piece.0;
            if total + len > self.max && !window.is_empty() {
                out.push((window[0].0, window[window.len() - 1].1));
                while total > self.overlap || (total + len > self.max && total > 0) {
                    let dropped = window.pop_front().expect("total > 0 implies a piece");
                    total -= dropped.1 - dropped.0;
                }
            }
            window.push_back(piece);
            total += len;
        }
        if let (Some(first), Some(last)) = (window.front(), window.back()) {
            out.push((first.0, last.1));
        }
    }
}
