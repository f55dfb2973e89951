use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::stats::{format_mean_std, paired_t_test, Pairing, TTestResult};
use super::{EvalConfig, EvalError, FoldAssignment};
use crate::chunkers::ChunkMethod;
use crate::embedding::{ProviderConfig, ProviderKind};
use crate::metrics::{Metric, MetricRecord};

pub const MARKDOWN_HEADERS: [&str; 6] =
    ["Method", "Chunks QTY", "Avg Retr. (L2)↓", "Khmer Cov.↑", "Ans. Rel. (Cos)↑", "Khmer IoU↑"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub fold_means: Vec<f64>,
}

/// One table row: a method's chunk count and cross-fold metric summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: ChunkMethod,
    pub chunk_count: usize,
    pub avg_l2: MetricSummary,
    pub khmer_coverage: MetricSummary,
    pub answer_relevance: MetricSummary,
    pub khmer_iou: MetricSummary,
}

impl MethodSummary {
    pub fn metric(&self, m: Metric) -> &MetricSummary {
        match m {
            Metric::AvgL2 => &self.avg_l2,
            Metric::KhmerCoverage => &self.khmer_coverage,
            Metric::AnswerRelevance => &self.answer_relevance,
            Metric::KhmerIou => &self.khmer_iou,
        }
    }
}

/// Settings that produced a report. Nothing host- or time-dependent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub tool_version: String,
    pub provider: ProviderKind,
    pub dim: usize,
    pub normalize: bool,
    pub k_retrieve: usize,
    pub folds: usize,
    pub seed: u64,
    pub pairing: Pairing,
    pub questions: usize,
    /// Question ids in each fold.
    pub fold_questions: Vec<Vec<String>>,
}

impl RunMeta {
    pub(crate) fn new(
        provider: &ProviderConfig,
        eval: &EvalConfig,
        records: &[MetricRecord],
        folds: &FoldAssignment,
    ) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            provider: provider.kind,
            dim: provider.dim,
            normalize: provider.normalize,
            k_retrieve: eval.k_retrieve,
            folds: folds.k,
            seed: folds.seed,
            pairing: eval.pairing,
            questions: records.len(),
            fold_questions: folds
                .folds
                .iter()
                .map(|f| f.iter().map(|&i| records[i].question_id.clone()).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecords {
    pub method: ChunkMethod,
    pub records: Vec<MetricRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub meta: RunMeta,
    pub summaries: Vec<MethodSummary>,
    pub tests: Vec<TTestResult>,
    pub records: Vec<MethodRecords>,
}

impl EvaluationReport {
    pub fn from_json(s: &str) -> Result<Self, EvalError> {
        serde_json::from_str(s).map_err(|e| EvalError::Report(e.to_string()))
    }

    fn available(&self) -> String {
        self.records.iter().map(|r| r.method.name()).collect::<Vec<_>>().join(", ")
    }

    fn records_of(&self, m: ChunkMethod) -> Result<&MethodRecords, EvalError> {
        self.records
            .iter()
            .find(|r| r.method == m)
            .ok_or_else(|| EvalError::MissingMethod { name: m.name().into(), available: self.available() })
    }

    /// Looks a method up by name, listing the available ones on failure.
    pub fn method_named(&self, name: &str) -> Result<ChunkMethod, EvalError> {
        name.parse::<ChunkMethod>()
            .ok()
            .filter(|m| self.records.iter().any(|r| r.method == *m))
            .ok_or_else(|| EvalError::MissingMethod { name: name.into(), available: self.available() })
    }

    /// Re-runs a paired test between two methods from the stored records.
    pub fn compare(
        &self,
        a: ChunkMethod,
        b: ChunkMethod,
        metric: Metric,
        pairing: Pairing,
    ) -> Result<TTestResult, EvalError> {
        let (ra, rb) = (self.records_of(a)?, self.records_of(b)?);
        let ids = |r: &MethodRecords| r.records.iter().map(|x| x.question_id.clone()).collect::<Vec<_>>();
        if ids(ra) != ids(rb) {
            return Err(EvalError::QuestionMismatch(format!("{a} vs {b}")));
        }
        let (xa, xb): (Vec<f64>, Vec<f64>) = match pairing {
            Pairing::PerQuestion => {
                (ra.records.iter().map(|r| metric.of(r)).collect(), rb.records.iter().map(|r| metric.of(r)).collect())
            }
            Pairing::PerFold => {
                let fold = |m| {
                    self.summaries
                        .iter()
                        .find(|s| s.method == m)
                        .map(|s| s.metric(metric).fold_means.clone())
                        .ok_or_else(|| EvalError::MissingMethod { name: m.name().into(), available: self.available() })
                };
                (fold(a)?, fold(b)?)
            }
        };
        Ok(TTestResult::new(metric, a, b, pairing, paired_t_test(&xa, &xb)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
    Csv,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Markdown, ReportFormat::Json, ReportFormat::Csv];

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format {s:?} (expected md, json or csv)")),
        }
    }
}

pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> Result<String, EvalError> {
    match format {
        ReportFormat::Markdown => Ok(render_markdown(report)),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| EvalError::Report(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => render_csv(report),
    }
}

fn fmt_t(t: f64) -> String {
    if t.is_finite() {
        format!("{t:.4}")
    } else if t > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn render_markdown(report: &EvaluationReport) -> String {
    let mut s = String::new();
    s.push_str("# Chunking strategy comparison\n\n");
    let _ = writeln!(s, "| {} |", MARKDOWN_HEADERS.join(" | "));
    let _ = writeln!(s, "|---|---:|---:|---:|---:|---:|");
    for row in &report.summaries {
        let cells: Vec<String> =
            Metric::ALL.iter().map(|&m| format_mean_std(row.metric(m).mean, row.metric(m).std)).collect();
        let _ = writeln!(s, "| {} | {} | {} |", row.method.label(), row.chunk_count, cells.join(" | "));
    }
    let m = &report.meta;
    let _ = writeln!(
        s,
        "\n{} questions, {} folds (seed {}), k_retrieve = {}, provider {} (dim {}, normalize = {}).",
        m.questions,
        m.folds,
        m.seed,
        m.k_retrieve,
        match m.provider {
            ProviderKind::Deterministic => "deterministic",
            ProviderKind::Remote => "remote",
        },
        m.dim,
        m.normalize
    );
    if !report.tests.is_empty() {
        let _ = writeln!(s, "\n## Paired t-tests (two-tailed, {} pairing)\n", m.pairing.name());
        s.push_str("| Metric | Method A | Method B | n | Mean diff | t | df | p |\n");
        s.push_str("|---|---|---|---:|---:|---:|---:|---:|\n");
        for t in &report.tests {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {:.4} | {} | {} | {:.4} |",
                t.metric.name(),
                t.method_a.label(),
                t.method_b.label(),
                t.n,
                t.mean_diff,
                fmt_t(t.t),
                t.df,
                t.p
            );
        }
    }
    s
}

fn render_csv(report: &EvaluationReport) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string(), "chunk_count".to_string()];
    for m in Metric::ALL {
        header.push(format!("{}_mean", m.name()));
        header.push(format!("{}_std", m.name()));
    }
    let to_err = |e: csv::Error| EvalError::Report(e.to_string());
    w.write_record(&header).map_err(to_err)?;
    for row in &report.summaries {
        let mut rec = vec![row.method.name().to_string(), row.chunk_count.to_string()];
        for m in Metric::ALL {
            rec.push(row.metric(m).mean.to_string());
            rec.push(row.metric(m).std.to_string());
        }
        w.write_record(&rec).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| EvalError::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| EvalError::Report(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{build_report, kfold_split, MethodRun};

    fn rec(id: &str, v: f64) -> MetricRecord {
        MetricRecord {
            question_id: id.into(),
            avg_l2: v,
            answer_relevance: 1.0 - v,
            khmer_coverage: 0.5 + v / 3.0,
            khmer_iou: v * v,
            flags: Default::default(),
        }
    }

    fn sample() -> EvaluationReport {
        let ids = ["q1", "q2", "q3", "q4"];
        let runs = vec![
            MethodRun {
                method: ChunkMethod::LlmBased,
                chunk_count: 3,
                records: ids.iter().zip([0.1, 0.4, 0.35, 0.2]).map(|(i, v)| rec(i, v)).collect(),
            },
            MethodRun {
                method: ChunkMethod::Recursive,
                chunk_count: 9,
                records: ids.iter().zip([0.3, 0.1, 0.25, 0.7]).map(|(i, v)| rec(i, v)).collect(),
            },
        ];
        let eval = EvalConfig { folds: 2, ..Default::default() };
        build_report(runs, &ProviderConfig::default(), &eval).unwrap()
    }

    #[test]
    fn markdown_header_and_format() {
        let md = render_report(&sample(), ReportFormat::Markdown).unwrap();
        let header = md.lines().find(|l| l.starts_with("| Method")).unwrap();
        let cols: Vec<&str> = header.trim_matches('|').split('|').map(str::trim).collect();
        assert_eq!(cols, MARKDOWN_HEADERS);
        let llm = md.lines().find(|l| l.starts_with("| LLM |")).unwrap();
        assert!(llm.starts_with("| LLM | 3 | "), "{llm}");
        assert_eq!(llm.matches(" ± ").count(), 4);
        assert!(md.contains("## Paired t-tests"));
        assert!(md.find("| LLM |").unwrap() < md.find("| Recursive |").unwrap());
    }

    #[test]
    fn json_roundtrip_renders_same_markdown() {
        let r = sample();
        let json = render_report(&r, ReportFormat::Json).unwrap();
        let back = EvaluationReport::from_json(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(
            render_report(&back, ReportFormat::Markdown).unwrap(),
            render_report(&r, ReportFormat::Markdown).unwrap()
        );
    }

    #[test]
    fn renders_are_byte_identical() {
        for f in ReportFormat::ALL {
            assert_eq!(render_report(&sample(), f).unwrap(), render_report(&sample(), f).unwrap());
        }
    }

    #[test]
    fn csv_shape() {
        let csv = render_report(&sample(), ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("method,chunk_count,avg_l2_mean,avg_l2_std,"));
        assert!(lines[1].starts_with("llm,3,"));
    }

    #[test]
    fn compare_self_is_null() {
        let r = sample();
        let t = r.compare(ChunkMethod::Recursive, ChunkMethod::Recursive, Metric::AvgL2, Pairing::PerQuestion).unwrap();
        assert_eq!((t.t, t.p), (0.0, 1.0));
        let t = r.compare(ChunkMethod::LlmBased, ChunkMethod::Recursive, Metric::KhmerIou, Pairing::PerFold).unwrap();
        assert_eq!(t.df, 1);
    }

    #[test]
    fn missing_method_lists_available() {
        let err = sample().method_named("sentence").unwrap_err().to_string();
        assert!(err.contains("llm, recursive"), "{err}");
        let _ = kfold_split(1, 1, 0).unwrap();
    }
}
