//! Khmer script classification and text normalization.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub const ZWSP: char = '\u{200B}';
const BOM: char = '\u{FEFF}';

/// Khmer block (U+1780..U+17FF).
pub const KHMER_BLOCK: RangeInclusive<char> = '\u{1780}'..='\u{17FF}';
/// Khmer Symbols block (U+19E0..U+19FF).
pub const KHMER_SYMBOLS_BLOCK: RangeInclusive<char> = '\u{19E0}'..='\u{19FF}';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("empty codepoint range {start:?}..={end:?}")]
    EmptyRange { start: char, end: char },
    #[error(
        "codepoint ranges must be sorted and disjoint (range starting at {0:?} overlaps or precedes its predecessor)"
    )]
    Unordered(char),
}

/// Which codepoints count as Khmer, and whether zero-width spaces are removed
/// during normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct ScriptProfile {
    khmer_ranges: Vec<RangeInclusive<char>>,
    strip_zwsp: bool,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    khmer_ranges: Vec<(char, char)>,
    strip_zwsp: bool,
}

impl TryFrom<RawProfile> for ScriptProfile {
    type Error = ProfileError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        ScriptProfile::new(raw.khmer_ranges.into_iter().map(|(a, b)| a..=b).collect(), raw.strip_zwsp)
    }
}

impl From<ScriptProfile> for RawProfile {
    fn from(p: ScriptProfile) -> Self {
        RawProfile {
            khmer_ranges: p.khmer_ranges.iter().map(|r| (*r.start(), *r.end())).collect(),
            strip_zwsp: p.strip_zwsp,
        }
    }
}

impl ScriptProfile {
    pub fn new(khmer_ranges: Vec<RangeInclusive<char>>, strip_zwsp: bool) -> Result<Self, ProfileError> {
        let mut prev_end: Option<char> = None;
        for r in &khmer_ranges {
            if r.start() > r.end() {
                return Err(ProfileError::EmptyRange { start: *r.start(), end: *r.end() });
            }
            if prev_end.is_some_and(|p| *r.start() <= p) {
                return Err(ProfileError::Unordered(*r.start()));
            }
            prev_end = Some(*r.end());
        }
        Ok(Self { khmer_ranges, strip_zwsp })
    }

    /// Khmer + Khmer Symbols blocks, ZWSP stripped. Used when scoring.
    pub fn for_metrics() -> Self {
        Self { khmer_ranges: vec![KHMER_BLOCK, KHMER_SYMBOLS_BLOCK], strip_zwsp: true }
    }

    /// Same ranges as [`ScriptProfile::for_metrics`] but keeps ZWSP, which
    /// marks word boundaries the chunkers can use.
    pub fn for_chunking() -> Self {
        Self { strip_zwsp: false, ..Self::for_metrics() }
    }

    pub fn khmer_ranges(&self) -> &[RangeInclusive<char>] {
        &self.khmer_ranges
    }

    pub fn strip_zwsp(&self) -> bool {
        self.strip_zwsp
    }

    pub fn is_khmer(&self, ch: char) -> bool {
        self.khmer_ranges.iter().any(|r| r.contains(&ch))
    }

    /// Distinct Khmer scalars of `text`, in codepoint order.
    pub fn khmer_char_set(&self, text: &str) -> BTreeSet<char> {
        text.chars().filter(|&c| self.is_khmer(c)).collect()
    }
}

impl Default for ScriptProfile {
    fn default() -> Self {
        Self::for_metrics()
    }
}

pub fn is_khmer(ch: char, profile: &ScriptProfile) -> bool {
    profile.is_khmer(ch)
}

pub fn khmer_char_set(text: &str, profile: &ScriptProfile) -> BTreeSet<char> {
    profile.khmer_char_set(text)
}

/// Removes leading byte-order marks, folds CRLF and lone CR to LF, optionally
/// drops every U+200B, then applies NFC.
///
/// ZWSP removal happens before composition so that a base and a combining
/// mark separated only by a ZWSP compose, which keeps the function idempotent.
pub fn normalize_text(raw: &str, profile: &ScriptProfile) -> String {
    let body = raw.trim_start_matches(BOM);
    let mut folded = String::with_capacity(body.len());
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\r' => {
                if chars.peek() == Some(&'\n') {
                    chars.next();
                }
                folded.push('\n');
            }
            ZWSP if profile.strip_zwsp => {}
            _ => folded.push(c),
        }
    }
    folded.nfc().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crlf_and_cr_become_lf() {
        let p = ScriptProfile::for_chunking();
        assert_eq!(normalize_text("a\r\nb", &p), "a\nb");
        assert_eq!(normalize_text("a\rb\r\r\n", &p), "a\nb\n\n");
    }

    #[test]
    fn composes_to_nfc() {
        let out = normalize_text("e\u{0301}", &ScriptProfile::default());
        assert_eq!(out, "\u{e9}");
        assert_eq!(out.chars().count(), 1);
    }

    #[test]
    fn strips_bom() {
        let p = ScriptProfile::default();
        assert_eq!(normalize_text("\u{FEFF}\u{FEFF}ក", &p), "ក");
    }

    #[test]
    fn zwsp_stripping_matches_codepoint_dump() {
        let raw = "ដាំ\u{200B}ស្វាយ\u{200B}ចន្ទី។\u{200B}";
        let stripped = normalize_text(raw, &ScriptProfile::for_metrics());
        // Oracle: codepoint dump of the input minus every 0x200B entry.
        let expected: Vec<u32> = raw.chars().map(|c| c as u32).filter(|&c| c != 0x200B).collect();
        let got: Vec<u32> = stripped.chars().map(|c| c as u32).collect();
        assert_eq!(got, expected);

        let kept = normalize_text(raw, &ScriptProfile::for_chunking());
        assert_eq!(kept.chars().filter(|&c| c == ZWSP).count(), 3);
    }

    #[test]
    fn zwsp_between_base_and_mark_still_idempotent() {
        let p = ScriptProfile::for_metrics();
        let once = normalize_text("e\u{200B}\u{0301}", &p);
        assert_eq!(once, "\u{e9}");
        assert_eq!(normalize_text(&once, &p), once);
    }

    #[test]
    fn khmer_classification() {
        let p = ScriptProfile::default();
        assert!(p.is_khmer('\u{1780}'));
        assert!(!p.is_khmer('a'));
        assert!(p.is_khmer('\u{17DB}'));
        assert!(p.is_khmer('\u{17E0}'));
        assert!(p.is_khmer('\u{19E0}'));
        assert!(!p.is_khmer('\u{1800}'));
        assert!(!p.is_khmer(ZWSP));
    }

    #[test]
    fn riel_sign_inside_configured_table() {
        // The range table itself is the oracle: 0x17DB lies in [0x1780, 0x17FF].
        let p = ScriptProfile::default();
        let in_table = p.khmer_ranges().iter().any(|r| (*r.start() as u32..=*r.end() as u32).contains(&0x17DB));
        assert!(in_table);
        assert_eq!(p.is_khmer('៛'), in_table);
    }

    #[test]
    fn char_set_dedups() {
        let p = ScriptProfile::default();
        assert_eq!(p.khmer_char_set("កកខ"), BTreeSet::from(['ក', 'ខ']));
        assert!(p.khmer_char_set("abc").is_empty());
    }

    #[test]
    fn char_set_matches_per_character_scan() {
        let p = ScriptProfile::default();
        let text = "NPK 15-15-15 ជីអ៊ុយរ៉េ and ប៉ូតាស្យូម ៛100";
        let mut oracle = Vec::new();
        for c in text.chars() {
            let cp = c as u32;
            if ((0x1780..=0x17FF).contains(&cp) || (0x19E0..=0x19FF).contains(&cp)) && !oracle.contains(&c) {
                oracle.push(c);
            }
        }
        oracle.sort();
        assert_eq!(p.khmer_char_set(text).into_iter().collect::<Vec<_>>(), oracle);
    }

    #[test]
    fn rejects_overlapping_ranges() {
        let err = ScriptProfile::new(vec!['\u{1780}'..='\u{17FF}', '\u{17F0}'..='\u{1800}'], true).unwrap_err();
        assert_eq!(err, ProfileError::Unordered('\u{17F0}'));
        #[allow(clippy::reversed_empty_ranges)]
        let err = ScriptProfile::new(vec!['b'..='a'], true).unwrap_err();
        assert!(matches!(err, ProfileError::EmptyRange { .. }));
    }

    #[test]
    fn profile_serde_roundtrip_validates() {
        let p = ScriptProfile::for_chunking();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<ScriptProfile>(&json).unwrap(), p);
        let bad = r#"{"khmer_ranges":[["z","a"]],"strip_zwsp":true}"#;
        assert!(serde_json::from_str::<ScriptProfile>(bad).is_err());
    }
}
