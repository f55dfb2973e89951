//! Run configuration: a TOML (or `.json`) file whose relative paths resolve
//! against the file's own directory, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use chunkbench_core::chunkers::{parse_mock_spec, ChunkConfig, ChunkMethod, MockLlm};
use chunkbench_core::embedding::{ProviderConfig, ProviderKind};
use chunkbench_core::evaluation::EvalConfig;
use serde::Deserialize;

use crate::error::{usage, CliError};
use crate::GlobalArgs;

const DEFAULT_WORKDIR: &str = "chunkbench-work";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    methods: Option<Vec<String>>,
    llm: Option<String>,
    paths: FilePaths,
    provider: ProviderConfig,
    chunk: ChunkConfig,
    eval: EvalConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FilePaths {
    corpus: Option<PathBuf>,
    qa: Option<PathBuf>,
    workdir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub qa: Option<PathBuf>,
    pub workdir: PathBuf,
    pub methods: Vec<ChunkMethod>,
    pub llm: Option<MockLlm>,
    pub provider: ProviderConfig,
    pub chunk: ChunkConfig,
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn corpus(&self) -> Result<&Path, CliError> {
        self.corpus.as_deref().ok_or_else(|| usage("no corpus path: set paths.corpus in the config or pass --corpus"))
    }

    pub fn qa(&self) -> Result<&Path, CliError> {
        self.qa.as_deref().ok_or_else(|| usage("no QA path: set paths.qa in the config or pass --qa"))
    }
}

fn parse_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

pub fn parse_methods(names: &[String]) -> Result<Vec<ChunkMethod>, CliError> {
    let mut out = Vec::new();
    for name in names {
        let m: ChunkMethod =
            name.trim().parse().map_err(|e: chunkbench_core::chunkers::ChunkError| usage(e.to_string()))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(usage("no methods selected"));
    }
    Ok(out)
}

pub fn load(args: &GlobalArgs) -> Result<RunConfig, CliError> {
    let (file, base) = match &args.config {
        Some(p) => (parse_file(p)?, p.parent().map(Path::to_path_buf).unwrap_or_default()),
        None => (FileConfig::default(), PathBuf::new()),
    };
    let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

    let method_names = if !args.methods.is_empty() {
        args.methods.clone()
    } else {
        file.methods.unwrap_or_else(|| ChunkMethod::ALL.iter().map(|m| m.name().to_string()).collect())
    };
    let methods = parse_methods(&method_names)?;

    let llm = match file.llm {
        Some(spec) => Some(parse_mock_spec(&spec).map_err(|e| usage(format!("{e}")))?),
        None => None,
    };

    let mut provider = file.provider;
    if let Some(kind) = args.provider {
        provider.kind = kind;
    }
    if let Some(endpoint) = &args.endpoint {
        provider.endpoint = Some(endpoint.clone());
    }
    if provider.kind == ProviderKind::Remote || args.endpoint.is_some() {
        provider.validate().map_err(|e| usage(e.to_string()))?;
    }

    let mut eval = file.eval;
    if let Some(seed) = args.seed {
        eval.seed = seed;
    }
    file.chunk.validate().map_err(|e| usage(e.to_string()))?;

    Ok(RunConfig {
        corpus: args.corpus.clone().or(file.paths.corpus.map(resolve)),
        qa: args.qa.clone().or(file.paths.qa.map(resolve)),
        workdir: args
            .workdir
            .clone()
            .unwrap_or_else(|| resolve(file.paths.workdir.unwrap_or_else(|| PathBuf::from(DEFAULT_WORKDIR)))),
        methods,
        llm,
        provider,
        chunk: file.chunk,
        eval,
    })
}
