use std::fmt;

use chunkbench_core::chunkers::ChunkError;
use chunkbench_core::corpus::CorpusError;
use chunkbench_core::embedding::EmbedError;
use chunkbench_core::evaluation::EvalError;
use chunkbench_core::vecindex::IndexError;

/// Exit 1 for usage and configuration problems, 2 for everything that goes
/// wrong while running (I/O, provider, corrupt artifacts).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn runtime(msg: impl Into<String>) -> CliError {
    CliError::Runtime(msg.into())
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        runtime(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        runtime(e.to_string())
    }
}

impl From<ChunkError> for CliError {
    fn from(e: ChunkError) -> Self {
        match e {
            ChunkError::InvalidConfig(_) | ChunkError::UnknownMethod(_) | ChunkError::MissingLlm => {
                usage(e.to_string())
            }
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::InvalidConfig(_) => usage(e.to_string()),
            _ => runtime(e.to_string()),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        runtime(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Chunk(c) => c.into(),
            EvalError::Embed(x) => x.into(),
            EvalError::InvalidFolds { .. }
            | EvalError::InvalidK
            | EvalError::MissingMethod { .. }
            | EvalError::NoMethods => usage(e.to_string()),
            _ => runtime(e.to_string()),
        }
    }
}
