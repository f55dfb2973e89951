use unicode_segmentation::UnicodeSegmentation;

/// A document indexed by Unicode scalar, with extended-grapheme-cluster
/// boundaries precomputed. All offsets are scalar indices.
pub(crate) struct CharView {
    chars: Vec<char>,
    boundary: Vec<bool>,
}

impl CharView {
    pub(crate) fn new(text: &str) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let mut boundary = vec![false; chars.len() + 1];
        let mut char_idx = 0;
        let mut byte_pos = 0;
        for (start, g) in text.grapheme_indices(true) {
            debug_assert_eq!(start, byte_pos);
            boundary[char_idx] = true;
            char_idx += g.chars().count();
            byte_pos = start + g.len();
        }
        boundary[chars.len()] = true;
        Self { chars, boundary }
    }

    pub(crate) fn len(&self) -> usize {
        self.chars.len()
    }

    pub(crate) fn chars(&self) -> &[char] {
        &self.chars
    }

    pub(crate) fn is_boundary(&self, idx: usize) -> bool {
        self.boundary[idx]
    }

    /// Smallest grapheme boundary `>= idx`.
    pub(crate) fn snap_forward(&self, mut idx: usize) -> usize {
        while !self.boundary[idx] {
            idx += 1;
        }
        idx
    }

    /// Grapheme cluster spans inside `[start, end)`. Both ends must be boundaries.
    pub(crate) fn clusters(&self, start: usize, end: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut s = start;
        for i in start + 1..=end {
            if self.boundary[i] {
                out.push((s, i));
                s = i;
            }
        }
        out
    }

    pub(crate) fn slice(&self, start: usize, end: usize) -> String {
        self.chars[start..end].iter().collect()
    }

    /// Narrows `[start, end)` by leading and trailing whitespace without
    /// cutting a grapheme cluster: a whitespace scalar that carries combining
    /// marks stays. `None` when the span is whitespace only.
    pub(crate) fn trim(&self, start: usize, end: usize) -> Option<(usize, usize)> {
        let mut a = start;
        while a < end && self.chars[a].is_whitespace() {
            a += 1;
        }
        if a == end {
            return None;
        }
        while a > start && !self.boundary[a] {
            a -= 1;
        }
        let mut b = end;
        while b > a && self.chars[b - 1].is_whitespace() {
            b -= 1;
        }
        while b < end && !self.boundary[b] {
            b += 1;
        }
        Some((a, b))
    }
}
