//! Cross-validated evaluation: folds, aggregation, paired t-tests, reports.

mod folds;
mod pipeline;
mod report;
mod stats;

pub use folds::{kfold_split, FoldAssignment};
pub use pipeline::{
    build_report, evaluate_method, index_chunks, run_experiment, score_against_index, summarize_method, t_tests,
    EvalConfig, MethodRun,
};
pub use report::{
    render_report, EvaluationReport, MethodRecords, MethodSummary, MetricSummary, ReportFormat, RunMeta,
    MARKDOWN_HEADERS,
};
pub use stats::{
    aggregate, format_mean_std, paired_t_test, t_tail_probability, Aggregate, PairedT, Pairing, TTestResult,
};

use thiserror::Error;

use crate::chunkers::ChunkError;
use crate::embedding::EmbedError;
use crate::metrics::MetricError;
use crate::vecindex::IndexError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot split {n} item(s) into {k} fold(s)")]
    InvalidFolds { n: usize, k: usize },
    #[error("cannot aggregate an empty list")]
    EmptyValues,
    #[error("degrees of freedom must be at least 1, got {0}")]
    InvalidDf(usize),
    #[error("{0} is not a finite number")]
    NonFinite(&'static str),
    #[error("paired samples differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("a paired t-test needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("no chunks to index")]
    EmptyChunks,
    #[error("no question-answer pairs")]
    EmptyQa,
    #[error("k_retrieve must be at least 1")]
    InvalidK,
    #[error("index key {0:?} has no matching chunk")]
    UnknownChunk(String),
    #[error("method {name:?} not in report (available: {available})")]
    MissingMethod { name: String, available: String },
    #[error("question lists differ between methods: {0}")]
    QuestionMismatch(String),
    #[error("no methods selected")]
    NoMethods,
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("report: {0}")]
    Report(String),
}
