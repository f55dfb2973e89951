//! Per-question retrieval scores.
//!
//! - average L2: mean query-to-hit distance over the hits returned;
//! - answer relevance: cosine between the mean hit embedding and the answer
//!   embedding;
//! - Khmer coverage: Khmer scalars over non-whitespace scalars of the
//!   retrieved text;
//! - Khmer IoU: intersection over union of the distinct Khmer scalars of the
//!   retrieved text and the answer.
//!
//! Degenerate inputs (zero vectors, no countable characters) score 0.0 and
//! record a flag instead of failing.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize_text, ScriptProfile};
use crate::embedding::{cosine, mean_vector, EmbeddingVector, VectorError};

pub const FLAG_ZERO_VECTOR: &str = "answer_relevance_zero_vector";
pub const FLAG_NO_NON_WHITESPACE: &str = "khmer_coverage_empty";
pub const FLAG_EMPTY_UNION: &str = "khmer_iou_empty_union";

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("retrieval result for {0:?} has no hits")]
    NoHits(String),
    #[error(transparent)]
    Vector(#[from] VectorError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievedChunk {
    pub key: String,
    pub distance: f64,
    pub text: String,
    pub vector: EmbeddingVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub question_id: String,
    pub k: usize,
    /// Ascending by distance, at most `k` entries.
    pub hits: Vec<RetrievedChunk>,
}

impl RetrievalResult {
    /// Hit texts joined with a newline.
    pub fn joined_text(&self) -> String {
        self.hits.iter().map(|h| h.text.as_str()).collect::<Vec<_>>().join("\n")
    }
}

/// A metric value; `degenerate` means the 0.0 is a convention, not a measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    pub degenerate: bool,
}

impl Score {
    fn measured(value: f64) -> Self {
        Self { value, degenerate: false }
    }

    fn degenerate() -> Self {
        Self { value: 0.0, degenerate: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub question_id: String,
    pub avg_l2: f64,
    pub answer_relevance: f64,
    pub khmer_coverage: f64,
    pub khmer_iou: f64,
    pub flags: BTreeSet<String>,
}

/// The four scored quantities, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AvgL2,
    KhmerCoverage,
    AnswerRelevance,
    KhmerIou,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::AvgL2, Metric::KhmerCoverage, Metric::AnswerRelevance, Metric::KhmerIou];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AvgL2 => "avg_l2",
            Metric::KhmerCoverage => "khmer_coverage",
            Metric::AnswerRelevance => "answer_relevance",
            Metric::KhmerIou => "khmer_iou",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn of(self, r: &MetricRecord) -> f64 {
        match self {
            Metric::AvgL2 => r.avg_l2,
            Metric::KhmerCoverage => r.khmer_coverage,
            Metric::AnswerRelevance => r.answer_relevance,
            Metric::KhmerIou => r.khmer_iou,
        }
    }
}

pub fn avg_retrieval_l2(result: &RetrievalResult) -> Result<f64, MetricError> {
    if result.hits.is_empty() {
        return Err(MetricError::NoHits(result.question_id.clone()));
    }
    Ok(result.hits.iter().map(|h| h.distance).sum::<f64>() / result.hits.len() as f64)
}

pub fn answer_relevance(result: &RetrievalResult, answer_vec: &EmbeddingVector) -> Result<Score, MetricError> {
    if result.hits.is_empty() {
        return Err(MetricError::NoHits(result.question_id.clone()));
    }
    let centroid = mean_vector(result.hits.iter().map(|h| &h.vector))?;
    let c = cosine(&centroid, answer_vec)?;
    Ok(if c.degenerate { Score::degenerate() } else { Score::measured(c.value) })
}

pub fn khmer_coverage(retrieved_text: &str, profile: &ScriptProfile) -> Score {
    let text = normalize_text(retrieved_text, profile);
    let (mut khmer, mut counted) = (0usize, 0usize);
    for c in text.chars().filter(|c| !c.is_whitespace()) {
        counted += 1;
        if profile.is_khmer(c) {
            khmer += 1;
        }
    }
    if counted == 0 {
        return Score::degenerate();
    }
    Score::measured(khmer as f64 / counted as f64)
}

pub fn khmer_iou(retrieved_text: &str, answer_text: &str, profile: &ScriptProfile) -> Score {
    let r = profile.khmer_char_set(&normalize_text(retrieved_text, profile));
    let a = profile.khmer_char_set(&normalize_text(answer_text, profile));
    let union = r.union(&a).count();
    if union == 0 {
        return Score::degenerate();
    }
    Score::measured(r.intersection(&a).count() as f64 / union as f64)
}

/// All four scores for one question.
pub fn score_question(
    result: &RetrievalResult,
    answer_text: &str,
    answer_vec: &EmbeddingVector,
    profile: &ScriptProfile,
) -> Result<MetricRecord, MetricError> {
    let avg_l2 = avg_retrieval_l2(result)?;
    let relevance = answer_relevance(result, answer_vec)?;
    let text = result.joined_text();
    let coverage = khmer_coverage(&text, profile);
    let iou = khmer_iou(&text, answer_text, profile);
    let mut flags = BTreeSet::new();
    for (score, flag) in [(relevance, FLAG_ZERO_VECTOR), (coverage, FLAG_NO_NON_WHITESPACE), (iou, FLAG_EMPTY_UNION)] {
        if score.degenerate {
            flags.insert(flag.to_string());
        }
    }
    Ok(MetricRecord {
        question_id: result.question_id.clone(),
        avg_l2,
        answer_relevance: relevance.value,
        khmer_coverage: coverage.value,
        khmer_iou: iou.value,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(x.to_vec()).unwrap()
    }

    fn result(hits: &[(f64, &[f64])]) -> RetrievalResult {
        RetrievalResult {
            question_id: "q".into(),
            k: hits.len(),
            hits: hits
                .iter()
                .enumerate()
                .map(|(i, (d, vec))| RetrievedChunk {
                    key: format!("c{i}"),
                    distance: *d,
                    text: String::new(),
                    vector: v(vec),
                })
                .collect(),
        }
    }

    #[test]
    fn avg_l2_examples() {
        assert_eq!(avg_retrieval_l2(&result(&[(0.4, &[1.0]), (0.6, &[1.0])])).unwrap(), 0.5);
        assert_eq!(avg_retrieval_l2(&result(&[(0.37, &[1.0])])).unwrap(), 0.37);
        let got = avg_retrieval_l2(&result(&[(0.2, &[1.0]), (0.5, &[1.0]), (0.8, &[1.0])])).unwrap();
        let independent = (0.8 + 0.5 + 0.2) / 3.0;
        assert!((got - 0.5).abs() < 1e-15 && (got - independent).abs() < 1e-15);
        assert!(matches!(avg_retrieval_l2(&result(&[])), Err(MetricError::NoHits(_))));
    }

    #[test]
    fn relevance_examples() {
        let ans = v(&[0.6, 0.8]);
        let same = answer_relevance(&result(&[(0.0, &[0.6, 0.8]), (0.0, &[0.6, 0.8])]), &ans).unwrap();
        assert!((same.value - 1.0).abs() < 1e-15);

        let mixed = answer_relevance(&result(&[(0.0, &[1.0, 0.0]), (0.0, &[0.0, 1.0])]), &v(&[1.0, 0.0])).unwrap();
        assert!((mixed.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let cancel = answer_relevance(&result(&[(0.0, &[1.0, -1.0]), (0.0, &[-1.0, 1.0])]), &ans).unwrap();
        assert_eq!(cancel, Score { value: 0.0, degenerate: true });
    }

    #[test]
    fn relevance_dim_mismatch() {
        let err = answer_relevance(&result(&[(0.0, &[1.0, 0.0])]), &v(&[1.0])).unwrap_err();
        assert!(matches!(err, MetricError::Vector(VectorError::DimMismatch { .. })));
    }

    #[test]
    fn coverage_examples() {
        let p = ScriptProfile::for_metrics();
        assert_eq!(khmer_coverage("កខគ", &p).value, 1.0);
        assert_eq!(khmer_coverage("abc", &p).value, 0.0);
        assert!((khmer_coverage("ABក", &p).value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(khmer_coverage("ក ខ", &p).value, 1.0);
        assert_eq!(khmer_coverage("ក\u{200B}ខ", &p).value, 1.0);
        assert_eq!(khmer_coverage(" \n", &p), Score { value: 0.0, degenerate: true });
    }

    #[test]
    fn iou_examples() {
        let p = ScriptProfile::for_metrics();
        assert_eq!(khmer_iou("ស្វាយចន្ទី", "ស្វាយចន្ទី", &p).value, 1.0);
        assert_eq!(khmer_iou("កខ", "គឃ", &p).value, 0.0);
        // {ក,ខ,គ} vs {ខ,គ,ឃ}: intersection 2, union 4.
        assert_eq!(khmer_iou("កខគ", "ខគឃ", &p).value, 0.5);
        assert_eq!(khmer_iou("abc", "xyz", &p), Score { value: 0.0, degenerate: true });
    }

    #[test]
    fn record_flags() {
        let mut r = result(&[(0.1, &[0.0, 0.0])]);
        r.hits[0].text = "abc".into();
        let rec = score_question(&r, "xyz", &v(&[1.0, 0.0]), &ScriptProfile::for_metrics()).unwrap();
        assert_eq!(rec.khmer_coverage, 0.0);
        assert_eq!(rec.flags.iter().map(String::as_str).collect::<Vec<_>>(), vec![FLAG_ZERO_VECTOR, FLAG_EMPTY_UNION]);
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.starts_with(r#"{"question_id":"q","avg_l2":0.1,"answer_relevance":0.0,"#), "{json}");
    }
}
