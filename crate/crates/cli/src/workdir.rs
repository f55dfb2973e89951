//! Workdir layout, the single-run lock and all-or-nothing file writes.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chunkbench_core::chunkers::ChunkMethod;

use crate::error::{runtime, usage, CliError};

const LOCK_FILE: &str = ".chunkbench.lock";

pub struct Workdir {
    root: PathBuf,
    lock: PathBuf,
}

impl Workdir {
    /// Creates the directory if needed and takes the lock.
    pub fn open(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| runtime(format!("cannot create workdir {}: {e}", root.display())))?;
        let lock = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(runtime(format!(
                    "workdir {} is in use by another run (delete {} if it is stale)",
                    root.display(),
                    lock.display()
                )));
            }
            Err(e) => return Err(runtime(format!("cannot lock workdir {}: {e}", root.display()))),
        }
        Ok(Self { root: root.to_path_buf(), lock })
    }

    pub fn chunks(&self, m: ChunkMethod) -> PathBuf {
        self.root.join("chunks").join(format!("{}.jsonl", m.name()))
    }

    pub fn index(&self, m: ChunkMethod) -> PathBuf {
        self.root.join("index").join(format!("{}.cbvx", m.name()))
    }

    pub fn metrics(&self, m: ChunkMethod) -> PathBuf {
        self.root.join("metrics").join(format!("{}.jsonl", m.name()))
    }

    pub fn embeddings(&self) -> PathBuf {
        self.root.join("embeddings.jsonl")
    }

    pub fn report(&self, ext: &str) -> PathBuf {
        self.root.join(format!("report.{ext}"))
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

/// Fails with a usage error naming the first output that already exists.
pub fn refuse_existing<'a>(paths: impl IntoIterator<Item = &'a PathBuf>, force: bool) -> Result<(), CliError> {
    if force {
        return Ok(());
    }
    if let Some(p) = paths.into_iter().find(|p| p.exists()) {
        return Err(usage(format!("{} already exists; pass --force to overwrite", p.display())));
    }
    Ok(())
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes every file to a temporary sibling first and renames them into
/// place only once all writes succeeded.
pub fn write_all_atomic(files: &[(PathBuf, Vec<u8>)]) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(files.len());
    let result = (|| -> std::io::Result<()> {
        for (path, bytes) in files {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            let tmp = tmp_path(path);
            staged.push(tmp.clone());
            let mut f = File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        for (path, _) in files {
            fs::rename(tmp_path(path), path)?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        for tmp in staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(runtime(format!("write failed: {e}")));
    }
    Ok(())
}

pub fn jsonl<T: serde::Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("serializable");
        out.push(b'\n');
    }
    out
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| runtime(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}
