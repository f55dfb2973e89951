use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chunkbench_core::chunkers::{chunk_corpus, Chunk, ChunkError, ChunkMethod, LlmClient};
use chunkbench_core::corpus::{load_corpus, load_qa, QaPair, ScriptProfile};
use chunkbench_core::embedding::{CachedEmbedder, Embedder, EmbeddingCache};
use chunkbench_core::evaluation::{
    build_report, index_chunks, render_report, score_against_index, EvaluationReport, MethodRun, Pairing, ReportFormat,
    TTestResult,
};
use chunkbench_core::metrics::Metric;
use chunkbench_core::vecindex::{decode, encode, FlatIndex};

use crate::config::RunConfig;
use crate::error::{runtime, usage, CliError};
use crate::workdir::{jsonl, read_jsonl, refuse_existing, write_all_atomic, Workdir};
use crate::GlobalArgs;

/// Progress lines go to stdout unless stdout is reserved for data.
pub struct Progress {
    to_stderr: bool,
}

impl Progress {
    pub fn new(args: &GlobalArgs) -> Self {
        Self { to_stderr: args.stdout }
    }

    fn line(&self, s: impl AsRef<str>) {
        if self.to_stderr {
            eprintln!("{}", s.as_ref());
        } else {
            println!("{}", s.as_ref());
        }
    }
}

pub struct Ctx<'a> {
    pub cfg: RunConfig,
    pub args: &'a GlobalArgs,
    pub out: Progress,
}

impl Ctx<'_> {
    fn formats(&self) -> Result<Vec<ReportFormat>, CliError> {
        let mut formats = self.args.format.clone();
        if formats.is_empty() {
            formats = if self.args.stdout { vec![ReportFormat::Markdown] } else { ReportFormat::ALL.to_vec() };
        }
        formats.dedup();
        if self.args.stdout && formats.len() != 1 {
            return Err(usage("--stdout takes exactly one --format"));
        }
        Ok(formats)
    }

    fn embedder(&self, wd: &Workdir) -> Result<CachedEmbedder, CliError> {
        let inner = self.cfg.provider.build()?;
        let cache = EmbeddingCache::load(&wd.embeddings())?;
        Ok(CachedEmbedder::new(inner, self.cfg.provider.fingerprint(), cache))
    }

    fn load_qa(&self) -> Result<Vec<QaPair>, CliError> {
        Ok(load_qa(self.cfg.qa()?, &ScriptProfile::for_chunking())?)
    }
}

fn cache_bytes(emb: CachedEmbedder) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    emb.into_cache().write_to(&mut buf)?;
    Ok(buf)
}

fn load_chunks(wd: &Workdir, m: ChunkMethod) -> Result<Vec<Chunk>, CliError> {
    let path = wd.chunks(m);
    if !path.exists() {
        return Err(usage(format!("{} not found; run `chunkbench chunk` first (or `evaluate --all`)", path.display())));
    }
    read_jsonl(&path)
}

fn produce_chunks(ctx: &Ctx) -> Result<Vec<(ChunkMethod, Vec<Chunk>)>, CliError> {
    let docs = load_corpus(ctx.cfg.corpus()?, &ScriptProfile::for_chunking())?;
    let llm = ctx.cfg.llm.as_ref().map(|m| m as &dyn LlmClient);
    let mut out = Vec::new();
    for &m in &ctx.cfg.methods {
        if m == ChunkMethod::LlmBased && llm.is_none() {
            return Err(usage(format!("{}; set `llm = \"mock:paragraph\"` in the config", ChunkError::MissingLlm)));
        }
        let chunks = chunk_corpus(&docs, m, &ctx.cfg.chunk, llm)?;
        let fallbacks =
            chunks.iter().filter(|c| c.fallback).map(|c| &c.doc_id).collect::<std::collections::BTreeSet<_>>();
        if fallbacks.is_empty() {
            ctx.out.line(format!("{m}: {} chunks", chunks.len()));
        } else {
            ctx.out.line(format!(
                "{m}: {} chunks ({} document(s) fell back to recursive)",
                chunks.len(),
                fallbacks.len()
            ));
        }
        out.push((m, chunks));
    }
    Ok(out)
}

pub fn chunk(ctx: &Ctx) -> Result<(), CliError> {
    let wd = Workdir::open(&ctx.cfg.workdir)?;
    let targets: Vec<PathBuf> = ctx.cfg.methods.iter().map(|&m| wd.chunks(m)).collect();
    if !ctx.args.stdout {
        refuse_existing(&targets, ctx.args.force)?;
    }
    let produced = produce_chunks(ctx)?;
    if ctx.args.stdout {
        let mut stdout = std::io::stdout().lock();
        for (_, chunks) in &produced {
            stdout.write_all(&jsonl(chunks))?;
        }
        return Ok(());
    }
    let files: Vec<(PathBuf, Vec<u8>)> = produced.iter().map(|(m, c)| (wd.chunks(*m), jsonl(c))).collect();
    write_all_atomic(&files)
}

pub fn embed(ctx: &Ctx) -> Result<(), CliError> {
    let wd = Workdir::open(&ctx.cfg.workdir)?;
    let emb = ctx.embedder(&wd)?;
    let mut texts = Vec::new();
    for &m in &ctx.cfg.methods {
        texts.extend(load_chunks(&wd, m)?.into_iter().map(|c| c.text));
    }
    if ctx.cfg.qa.is_some() {
        for p in ctx.load_qa()? {
            texts.push(p.question);
            texts.push(p.answer);
        }
    }
    emb.embed(&texts)?;
    let bytes = cache_bytes(emb)?;
    write_all_atomic(&[(wd.embeddings(), bytes)])?;
    ctx.out.line(format!("embedded {} texts into {}", texts.len(), wd.embeddings().display()));
    Ok(())
}

fn build_indexes(
    ctx: &Ctx,
    emb: &dyn Embedder,
    chunks: &[(ChunkMethod, Vec<Chunk>)],
) -> Result<Vec<(ChunkMethod, FlatIndex)>, CliError> {
    chunks
        .iter()
        .map(|(m, c)| {
            let idx = index_chunks(c, emb, ctx.cfg.provider.normalize)?;
            ctx.out.line(format!("{m}: indexed {} chunks (dim {})", idx.len(), idx.dim()));
            Ok((*m, idx))
        })
        .collect()
}

pub fn index(ctx: &Ctx) -> Result<(), CliError> {
    let wd = Workdir::open(&ctx.cfg.workdir)?;
    let targets: Vec<PathBuf> = ctx.cfg.methods.iter().map(|&m| wd.index(m)).collect();
    refuse_existing(&targets, ctx.args.force)?;
    let chunks =
        ctx.cfg.methods.iter().map(|&m| Ok((m, load_chunks(&wd, m)?))).collect::<Result<Vec<_>, CliError>>()?;
    let emb = ctx.embedder(&wd)?;
    let indexes = build_indexes(ctx, &emb, &chunks)?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = indexes.iter().map(|(m, idx)| (wd.index(*m), encode(idx))).collect();
    files.push((wd.embeddings(), cache_bytes(emb)?));
    write_all_atomic(&files)
}

/// The saved index if it matches the chunk file, otherwise an error.
fn load_matching_index(
    ctx: &Ctx,
    wd: &Workdir,
    m: ChunkMethod,
    chunks: &[Chunk],
) -> Result<Option<FlatIndex>, CliError> {
    let path = wd.index(m);
    if !path.exists() {
        return Ok(None);
    }
    let bytes = fs::read(&path)?;
    let idx = decode(&bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    let keys_match = idx.len() == chunks.len() && idx.keys().iter().zip(chunks).all(|(k, c)| *k == c.key());
    if !keys_match || idx.dim() != ctx.cfg.provider.dim {
        return Err(runtime(format!(
            "{} does not match the current chunks or provider; rerun `chunkbench index --force`",
            path.display()
        )));
    }
    Ok(Some(idx))
}

pub fn evaluate(ctx: &Ctx, all: bool) -> Result<(), CliError> {
    let wd = Workdir::open(&ctx.cfg.workdir)?;
    let formats = ctx.formats()?;
    let methods = &ctx.cfg.methods;
    let mut targets: Vec<PathBuf> = methods.iter().map(|&m| wd.metrics(m)).collect();
    if !ctx.args.stdout {
        targets.extend(formats.iter().map(|f| wd.report(f.extension())));
    }
    if all {
        targets.extend(methods.iter().flat_map(|&m| [wd.chunks(m), wd.index(m)]));
    }
    refuse_existing(&targets, ctx.args.force)?;

    let qa = ctx.load_qa()?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    let chunks = if all {
        let produced = produce_chunks(ctx)?;
        files.extend(produced.iter().map(|(m, c)| (wd.chunks(*m), jsonl(c))));
        produced
    } else {
        methods.iter().map(|&m| Ok((m, load_chunks(&wd, m)?))).collect::<Result<Vec<_>, CliError>>()?
    };

    let emb = ctx.embedder(&wd)?;
    let profile = ScriptProfile::for_metrics();
    let mut runs = Vec::with_capacity(chunks.len());
    for (m, c) in &chunks {
        let idx = match if all { None } else { load_matching_index(ctx, &wd, *m, c)? } {
            Some(idx) => idx,
            None => {
                let idx = index_chunks(c, &emb, ctx.cfg.provider.normalize)?;
                if all {
                    files.push((wd.index(*m), encode(&idx)));
                }
                idx
            }
        };
        let records = score_against_index(&idx, c, &qa, &emb, ctx.cfg.eval.k_retrieve, &profile)?;
        files.push((wd.metrics(*m), jsonl(&records)));
        runs.push(MethodRun { method: *m, chunk_count: c.len(), records });
        ctx.out.line(format!("{m}: scored {} questions", qa.len()));
    }
    let report = build_report(runs, &ctx.cfg.provider, &ctx.cfg.eval)?;
    files.push((wd.embeddings(), cache_bytes(emb)?));

    if ctx.args.stdout {
        write_all_atomic(&files)?;
        print!("{}", render_report(&report, formats[0])?);
        return Ok(());
    }
    let mut written = Vec::new();
    for f in &formats {
        files.push((wd.report(f.extension()), render_report(&report, *f)?.into_bytes()));
        written.push(wd.report(f.extension()).display().to_string());
    }
    write_all_atomic(&files)?;
    ctx.out.line(format!("wrote {}", written.join(", ")));
    Ok(())
}

fn read_report(path: &Path) -> Result<EvaluationReport, CliError> {
    let text = fs::read_to_string(path).map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))?;
    EvaluationReport::from_json(&text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn report_path(ctx: &Ctx, explicit: Option<&Path>) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| ctx.cfg.workdir.join("report.json"))
}

pub fn compare(
    ctx: &Ctx,
    report: Option<&Path>,
    a: &str,
    b: &str,
    metric: &str,
    pairing: Option<&str>,
) -> Result<(), CliError> {
    let metric = Metric::parse(metric).ok_or_else(|| {
        let names: Vec<&str> = Metric::ALL.iter().map(|m| m.name()).collect();
        usage(format!("unknown metric {metric:?} (available: {})", names.join(", ")))
    })?;
    let report = read_report(&report_path(ctx, report))?;
    let pairing = match pairing {
        Some(p) => {
            Pairing::parse(p).ok_or_else(|| usage(format!("unknown pairing {p:?} (per_question or per_fold)")))?
        }
        None => report.meta.pairing,
    };
    let (ma, mb) = (report.method_named(a)?, report.method_named(b)?);
    let t = report.compare(ma, mb, metric, pairing)?;
    if ctx.args.format.first() == Some(&ReportFormat::Json) {
        println!("{}", serde_json::to_string_pretty(&t).map_err(|e| runtime(e.to_string()))?);
    } else {
        print!("{}", render_ttest(&t));
    }
    Ok(())
}

fn render_ttest(t: &TTestResult) -> String {
    let tval = if t.t.is_finite() { format!("{:.4}", t.t) } else { t.t.to_string() };
    format!(
        "| Metric | Method A | Method B | Pairing | n | Mean diff | t | df | p |\n\
         |---|---|---|---|---:|---:|---:|---:|---:|\n\
         | {} | {} | {} | {} | {} | {:.4} | {} | {} | {:.4} |\n",
        t.metric.name(),
        t.method_a.label(),
        t.method_b.label(),
        t.pairing.name(),
        t.n,
        t.mean_diff,
        tval,
        t.df,
        t.p
    )
}

pub fn report(ctx: &Ctx, source: Option<&Path>) -> Result<(), CliError> {
    let formats = ctx.formats()?;
    let path = report_path(ctx, source);
    let report = read_report(&path)?;
    if ctx.args.stdout {
        print!("{}", render_report(&report, formats[0])?);
        return Ok(());
    }
    let wd = Workdir::open(&ctx.cfg.workdir)?;
    let targets: Vec<PathBuf> = formats.iter().map(|f| wd.report(f.extension())).filter(|p| *p != path).collect();
    refuse_existing(&targets, ctx.args.force)?;
    let files = formats
        .iter()
        .map(|f| Ok((wd.report(f.extension()), render_report(&report, *f)?.into_bytes())))
        .collect::<Result<Vec<_>, CliError>>()?;
    write_all_atomic(&files)?;
    ctx.out.line(format!("rendered {} format(s) from {}", files.len(), path.display()));
    Ok(())
}
