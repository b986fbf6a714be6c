use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn core_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn engine(data: &Path, args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_engine"))
        .args(args)
        .env("CONVO_DATA_DIR", data)
        .env("RUST_LOG", "warn")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ckt_validate_reports_templates_and_duplicates() {
    let data = tempfile::tempdir().unwrap();
    let ckt = core_dir().join("data/ckt");
    let out = stdout(&engine(data.path(), &["ckt", "validate", ckt.to_str().unwrap()], ""));
    assert_eq!(out.lines().filter(|l| l.starts_with("ok ")).count(), 8, "{out}");

    let dup = tempfile::tempdir().unwrap();
    for name in ["a.toml", "b.toml"] {
        std::fs::copy(ckt.join("pets.toml"), dup.path().join(name)).unwrap();
    }
    let o = engine(data.path(), &["ckt", "validate", dup.path().to_str().unwrap()], "");
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("pets"));
}

#[test]
fn built_index_is_used_by_chat() {
    let data = tempfile::tempdir().unwrap();
    let corpus = tempfile::tempdir().unwrap();
    std::fs::write(
        corpus.path().join("bands.tsv"),
        "id\tname\tentity_type\tranking_attribute\tsource\nband:zq\tZorblax Quartet\tmusic_artist\t\ttest\n",
    )
    .unwrap();
    let out = stdout(&engine(data.path(), &["index", "build", "--corpus", corpus.path().to_str().unwrap()], ""));
    assert!(out.starts_with("indexed 1 entities"), "{out}");
    assert!(data.path().join("entity-index.json").exists());

    let out = stdout(&engine(data.path(), &["chat"], "hello\n/debug\ni adore the zorblax quartet\n/quit\n"));
    assert!(out.contains("\"name\": \"Zorblax Quartet\""), "{out}");
    assert!(out.contains("Goodbye"), "{out}");
}

#[test]
fn news_ingest_persists_for_later_runs() {
    let data = tempfile::tempdir().unwrap();
    let file = core_dir().join("tests/fixtures/news100.jsonl");
    let out = stdout(&engine(data.path(), &["news", "ingest", file.to_str().unwrap()], ""));
    assert_eq!(out.trim(), "ingested 85, duplicates 0, non-english 12, malformed 3");
    let out = stdout(&engine(data.path(), &["news", "ingest", file.to_str().unwrap()], ""));
    assert!(out.starts_with("ingested 0, duplicates 85"), "{out}");
}

#[test]
fn config_file_and_env_errors_are_reported() {
    let data = tempfile::tempdir().unwrap();
    let cfg = data.path().join("engine.toml");
    std::fs::write(&cfg, "turns_per_topic = 0\n").unwrap();
    let o = engine(data.path(), &["chat", "--config", cfg.to_str().unwrap()], "/quit\n");
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("turns_per_topic"));

    let o = Command::new(env!("CARGO_BIN_EXE_engine")).arg("serve").env("CONVO_PORT", "http").output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("CONVO_PORT"));
}
