use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mini_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini/config.toml")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(workdir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chunkbench"))
        .arg("--config")
        .arg(mini_config())
        .arg("--workdir")
        .arg(workdir)
        .args(args)
        .env_remove("CHUNKBENCH_ENDPOINT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const GOLDEN_FILES: [&str; 7] = [
    "report.md",
    "report.json",
    "report.csv",
    "metrics/llm.jsonl",
    "metrics/khmer_aware.jsonl",
    "metrics/recursive.jsonl",
    "metrics/sentence.jsonl",
];

/// Set `UPDATE_GOLDEN=1` to rewrite the snapshots from the current build.
fn check_golden(name: &str, actual: &[u8]) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read(&path).unwrap_or_else(|e| panic!("missing golden {}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from golden snapshot");
}

#[test]
fn evaluate_matches_golden_and_is_repeatable() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for wd in [a.path(), b.path()] {
        let o = run(wd, &["evaluate", "--all"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for name in GOLDEN_FILES {
        let first = fs::read(a.path().join(name)).unwrap();
        assert_eq!(first, fs::read(b.path().join(name)).unwrap(), "{name} differs between runs");
        check_golden(name, &first);
    }
}

#[test]
fn staged_pipeline_equals_all_in_one() {
    let (staged, direct) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for step in ["chunk", "embed", "index", "evaluate"] {
        let o = run(staged.path(), &[step]);
        assert_eq!(code(&o), 0, "{step}: {}", stderr(&o));
    }
    assert_eq!(code(&run(direct.path(), &["evaluate", "--all"])), 0);
    for name in ["report.json", "report.md", "chunks/recursive.jsonl", "index/llm.cbvx", "embeddings.jsonl"] {
        assert_eq!(fs::read(staged.path().join(name)).unwrap(), fs::read(direct.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn chunk_writes_one_file_per_method_and_refuses_rerun() {
    let wd = tempfile::tempdir().unwrap();
    let o = run(wd.path(), &["chunk"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for m in ["llm", "khmer_aware", "recursive", "sentence"] {
        assert!(wd.path().join(format!("chunks/{m}.jsonl")).exists());
        assert!(stdout(&o).contains(&format!("{m}: ")), "{}", stdout(&o));
    }
    let before = fs::read(wd.path().join("chunks/recursive.jsonl")).unwrap();

    let again = run(wd.path(), &["chunk"]);
    assert_eq!(code(&again), 1);
    assert!(stderr(&again).contains("--force"), "{}", stderr(&again));

    assert_eq!(code(&run(wd.path(), &["chunk", "--force"])), 0);
    assert_eq!(fs::read(wd.path().join("chunks/recursive.jsonl")).unwrap(), before);
    assert!(!wd.path().join(".chunkbench.lock").exists());
}

#[test]
fn recursive_emits_more_chunks_than_paragraph_llm() {
    let wd = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(wd.path(), &["chunk"])), 0);
    let count = |m: &str| fs::read_to_string(wd.path().join(format!("chunks/{m}.jsonl"))).unwrap().lines().count();
    assert!(count("recursive") > count("llm"), "{} vs {}", count("recursive"), count("llm"));
}

#[test]
fn unknown_method_is_a_usage_error() {
    let wd = tempfile::tempdir().unwrap();
    let o = run(wd.path(), &["--methods", "recursive,semantic", "chunk"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("semantic"), "{}", stderr(&o));

    let cfg = wd.path().join("bad.toml");
    fs::write(&cfg, "methods = [\"fixed_size\"]\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_chunkbench"))
        .args(["--config", cfg.to_str().unwrap(), "chunk"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("fixed_size"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_exits_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_chunkbench")).args(["chunk", "--bogus"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn json_format_only_writes_json() {
    let wd = tempfile::tempdir().unwrap();
    let o = run(wd.path(), &["--format", "json", "evaluate", "--all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(wd.path().join("report.json").exists());
    assert!(!wd.path().join("report.md").exists());
    assert!(!wd.path().join("report.csv").exists());
}

#[test]
fn stdout_mode_prints_report_instead_of_writing_it() {
    let wd = tempfile::tempdir().unwrap();
    let o = run(wd.path(), &["--stdout", "--format", "md", "evaluate", "--all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("# Chunking strategy comparison"));
    assert!(!wd.path().join("report.md").exists());
    assert!(stderr(&o).contains("recursive: scored"));
}

#[test]
fn remote_provider_down_exits_two_without_reports() {
    let wd = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let endpoint = format!("http://127.0.0.1:{port}");
    let o = run(wd.path(), &["--provider", "remote", "--endpoint", &endpoint, "evaluate", "--all"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    for ext in ["md", "json", "csv"] {
        assert!(!wd.path().join(format!("report.{ext}")).exists());
    }
    let leftovers: Vec<_> = fs::read_dir(wd.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn endpoint_falls_back_to_environment() {
    let wd = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_chunkbench"))
        .arg("--config")
        .arg(mini_config())
        .arg("--workdir")
        .arg(wd.path())
        .args(["--provider", "remote", "embed"])
        .env("CHUNKBENCH_ENDPOINT", "http://127.0.0.1:9")
        .output()
        .unwrap();
    // Config validation passed; the run stops later, at the missing chunk files.
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("chunkbench chunk"), "{}", stderr(&o));

    let o = run(wd.path(), &["--provider", "remote", "embed"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("endpoint"), "{}", stderr(&o));
}

#[test]
fn compare_commands() {
    let wd = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(wd.path(), &["evaluate", "--all"])), 0);

    let same = run(wd.path(), &["compare", "recursive", "recursive"]);
    assert_eq!(code(&same), 0, "{}", stderr(&same));
    assert!(stdout(&same).contains("| 0.0000 | 5 | 1.0000 |"), "{}", stdout(&same));

    let o = run(wd.path(), &["compare", "recursive", "sentence", "--metric", "avg_l2"]);
    assert_eq!(code(&o), 0);
    check_golden("compare_recursive_sentence_avg_l2.txt", &o.stdout);

    let missing = run(wd.path(), &["--methods", "recursive", "compare", "recursive", "fixed"]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("available: llm, khmer_aware, recursive, sentence"), "{}", stderr(&missing));

    let bad_metric = run(wd.path(), &["compare", "recursive", "llm", "--metric", "bleu"]);
    assert_eq!(code(&bad_metric), 1);

    let per_fold = run(wd.path(), &["compare", "llm", "recursive", "--pairing", "per_fold"]);
    assert!(stdout(&per_fold).contains("| per_fold | 5 |"), "{}", stdout(&per_fold));
}

#[test]
fn report_rerenders_from_json() {
    let wd = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(wd.path(), &["--format", "json", "evaluate", "--all"])), 0);
    let o = run(wd.path(), &["--format", "md,csv", "report"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let md = fs::read(wd.path().join("report.md")).unwrap();
    check_golden("report.md", &md);
}

#[test]
fn locked_workdir_is_refused() {
    let wd = tempfile::tempdir().unwrap();
    fs::write(wd.path().join(".chunkbench.lock"), "123").unwrap();
    let o = run(wd.path(), &["chunk"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("in use"), "{}", stderr(&o));
}

#[test]
fn stale_index_is_detected() {
    let wd = tempfile::tempdir().unwrap();
    for step in ["chunk", "index"] {
        assert_eq!(code(&run(wd.path(), &[step])), 0);
    }
    let path = wd.path().join("chunks/recursive.jsonl");
    let trimmed: String = fs::read_to_string(&path).unwrap().lines().skip(1).map(|l| format!("{l}\n")).collect();
    fs::write(&path, trimmed).unwrap();
    let o = run(wd.path(), &["evaluate"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("index --force"), "{}", stderr(&o));
}
