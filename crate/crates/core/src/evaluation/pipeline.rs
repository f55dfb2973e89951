use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::report::{EvaluationReport, MethodRecords, MethodSummary, MetricSummary, RunMeta};
use super::stats::{aggregate, paired_t_test, Pairing, TTestResult};
use super::{kfold_split, EvalError, FoldAssignment};
use crate::chunkers::{chunk_corpus, Chunk, ChunkConfig, ChunkMethod, LlmClient};
use crate::corpus::{Document, QaPair, ScriptProfile};
use crate::embedding::{Embedder, ProviderConfig};
use crate::metrics::{score_question, Metric, MetricRecord, RetrievalResult, RetrievedChunk};
use crate::vecindex::FlatIndex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k_retrieve: usize,
    pub folds: usize,
    pub seed: u64,
    pub pairing: Pairing,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { k_retrieve: 5, folds: 5, seed: 42, pairing: Pairing::PerQuestion }
    }
}

/// Embeds every chunk text and indexes it under [`Chunk::key`].
pub fn index_chunks(chunks: &[Chunk], embedder: &dyn Embedder, normalized: bool) -> Result<FlatIndex, EvalError> {
    if chunks.is_empty() {
        return Err(EvalError::EmptyChunks);
    }
    let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
    let vectors = embedder.embed(&texts)?;
    let entries = chunks.iter().map(Chunk::key).zip(vectors).collect();
    Ok(FlatIndex::build(entries, normalized)?)
}

/// Retrieves the top `k_retrieve` chunks for each question and scores them.
/// Records come back in `qa` order.
pub fn score_against_index(
    index: &FlatIndex,
    chunks: &[Chunk],
    qa: &[QaPair],
    embedder: &dyn Embedder,
    k_retrieve: usize,
    profile: &ScriptProfile,
) -> Result<Vec<MetricRecord>, EvalError> {
    if qa.is_empty() {
        return Err(EvalError::EmptyQa);
    }
    if index.is_empty() {
        return Err(EvalError::EmptyChunks);
    }
    if k_retrieve == 0 {
        return Err(EvalError::InvalidK);
    }
    let text_of: HashMap<String, &str> = chunks.iter().map(|c| (c.key(), c.text.as_str())).collect();

    let mut texts: Vec<String> = qa.iter().map(|p| p.question.clone()).collect();
    texts.extend(qa.iter().map(|p| p.answer.clone()));
    let vectors = embedder.embed(&texts)?;
    let (questions, answers) = vectors.split_at(qa.len());

    let mut records = Vec::with_capacity(qa.len());
    for ((pair, q), a) in qa.iter().zip(questions).zip(answers) {
        let hits = index
            .search(q, k_retrieve)?
            .into_iter()
            .map(|h| {
                let text = text_of.get(&h.key).ok_or_else(|| EvalError::UnknownChunk(h.key.clone()))?;
                Ok(RetrievedChunk {
                    vector: index.row_vector(h.row),
                    text: text.to_string(),
                    key: h.key,
                    distance: h.distance,
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        let result = RetrievalResult { question_id: pair.id.clone(), k: k_retrieve, hits };
        records.push(score_question(&result, &pair.answer, a, profile)?);
    }
    Ok(records)
}

pub fn evaluate_method(
    chunks: &[Chunk],
    qa: &[QaPair],
    embedder: &dyn Embedder,
    provider: &ProviderConfig,
    k_retrieve: usize,
    profile: &ScriptProfile,
) -> Result<Vec<MetricRecord>, EvalError> {
    if qa.is_empty() {
        return Err(EvalError::EmptyQa);
    }
    let index = index_chunks(chunks, embedder, provider.normalize)?;
    score_against_index(&index, chunks, qa, embedder, k_retrieve, profile)
}

/// Per-question scores of one method plus its chunk count.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method: ChunkMethod,
    pub chunk_count: usize,
    pub records: Vec<MetricRecord>,
}

fn fold_means(records: &[MetricRecord], folds: &FoldAssignment, metric: Metric) -> Result<Vec<f64>, EvalError> {
    folds
        .folds
        .iter()
        .map(|fold| {
            let values: Vec<f64> = fold.iter().map(|&i| metric.of(&records[i])).collect();
            Ok(aggregate(&values)?.mean)
        })
        .collect()
}

/// Averages within each fold, then takes mean ± sample std across folds.
pub fn summarize_method(run: &MethodRun, folds: &FoldAssignment) -> Result<MethodSummary, EvalError> {
    let n = folds.folds.iter().map(Vec::len).sum::<usize>();
    if n != run.records.len() {
        return Err(EvalError::LengthMismatch { left: run.records.len(), right: n });
    }
    let summarize = |metric: Metric| -> Result<MetricSummary, EvalError> {
        let fold_means = fold_means(&run.records, folds, metric)?;
        let agg = aggregate(&fold_means)?;
        Ok(MetricSummary { mean: agg.mean, std: agg.std, fold_means })
    };
    Ok(MethodSummary {
        method: run.method,
        chunk_count: run.chunk_count,
        avg_l2: summarize(Metric::AvgL2)?,
        khmer_coverage: summarize(Metric::KhmerCoverage)?,
        answer_relevance: summarize(Metric::AnswerRelevance)?,
        khmer_iou: summarize(Metric::KhmerIou)?,
    })
}

fn check_same_questions(a: &MethodRun, b: &MethodRun) -> Result<(), EvalError> {
    let ids = |r: &MethodRun| r.records.iter().map(|x| x.question_id.clone()).collect::<Vec<_>>();
    if ids(a) != ids(b) {
        return Err(EvalError::QuestionMismatch(format!("{} vs {}", a.method, b.method)));
    }
    Ok(())
}

/// Paired tests for every method pair `(i, j)`, `i < j`, on every metric.
pub fn t_tests(runs: &[MethodRun], folds: &FoldAssignment, pairing: Pairing) -> Result<Vec<TTestResult>, EvalError> {
    let mut out = Vec::new();
    for metric in Metric::ALL {
        for (i, a) in runs.iter().enumerate() {
            for b in &runs[i + 1..] {
                check_same_questions(a, b)?;
                let (xa, xb) = match pairing {
                    Pairing::PerQuestion => (
                        a.records.iter().map(|r| metric.of(r)).collect(),
                        b.records.iter().map(|r| metric.of(r)).collect(),
                    ),
                    Pairing::PerFold => {
                        (fold_means(&a.records, folds, metric)?, fold_means(&b.records, folds, metric)?)
                    }
                };
                let r = paired_t_test(&xa, &xb)?;
                out.push(TTestResult::new(metric, a.method, b.method, pairing, r));
            }
        }
    }
    Ok(out)
}

/// Chunks, indexes, retrieves and scores every method, then aggregates.
#[allow(clippy::too_many_arguments)]
pub fn run_experiment(
    docs: &[Document],
    qa: &[QaPair],
    methods: &[ChunkMethod],
    chunk_cfg: &ChunkConfig,
    llm: Option<&dyn LlmClient>,
    embedder: &dyn Embedder,
    provider: &ProviderConfig,
    eval: &EvalConfig,
    profile: &ScriptProfile,
) -> Result<EvaluationReport, EvalError> {
    let mut runs = Vec::with_capacity(methods.len());
    for &method in methods {
        let chunks = chunk_corpus(docs, method, chunk_cfg, llm)?;
        let records = evaluate_method(&chunks, qa, embedder, provider, eval.k_retrieve, profile)?;
        runs.push(MethodRun { method, chunk_count: chunks.len(), records });
    }
    build_report(runs, provider, eval)
}

/// Aggregates finished runs into a report. Runs keep their given order.
pub fn build_report(
    runs: Vec<MethodRun>,
    provider: &ProviderConfig,
    eval: &EvalConfig,
) -> Result<EvaluationReport, EvalError> {
    let first = runs.first().ok_or(EvalError::NoMethods)?;
    let folds = kfold_split(first.records.len(), eval.folds, eval.seed)?;
    let summaries = runs.iter().map(|r| summarize_method(r, &folds)).collect::<Result<Vec<_>, _>>()?;
    let tests = if runs.len() >= 2 { t_tests(&runs, &folds, eval.pairing)? } else { Vec::new() };
    let meta = RunMeta::new(provider, eval, &first.records, &folds);
    let records = runs.into_iter().map(|r| MethodRecords { method: r.method, records: r.records }).collect();
    Ok(EvaluationReport { meta, summaries, tests, records })
}
