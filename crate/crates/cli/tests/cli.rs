use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bjy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bjy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn id_bool_reports_the_error_and_exits_one() {
    let o = bjy(&["check", &corpus("id_bool.bjy")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("** Bluejay Type Errors **"), "{out}");
    assert!(out.contains("* Value    : id"));
    assert!(out.contains("* Expected : (bool -> bool)"));
    assert!(out.contains("* Actual   : (bool -> int)"));
}

#[test]
fn transform_record_is_clean_and_exits_zero() {
    let o = bjy(&["check", &corpus("transform_record.bjy")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("No errors found"));
}

#[test]
fn usage_and_parse_failures_exit_two() {
    assert_eq!(bjy(&["check", "/nonexistent/prog.bjy"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.bjy", "let x = in");
    let o = bjy(&["check", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(bjy(&["check", "--backend", "magic", &bad]).status.code(), Some(2));
}

#[test]
fn witnesses_replay_to_error() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.feed").to_string_lossy().into_owned();
    let prog = corpus("appl_int.bjy");
    let o = bjy(&["check", &prog, "--witness", &witness, "--format", "structured"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l == "verdict=error-found"));
    let r = bjy(&["replay", &prog, &witness, "--expect-error"]);
    assert_eq!(r.status.code(), Some(0), "{}", stdout(&r));
    assert!(stdout(&r).contains("ERROR"));
}

#[test]
fn other_backends_agree_on_small_programs() {
    let prog = corpus("id_bool.bjy");
    for backend in ["exhaustive", "fuzz"] {
        assert_eq!(
            bjy(&["check", "--backend", backend, &prog]).status.code(),
            Some(1),
            "{backend}"
        );
    }
    let clean = corpus("id_int.bjy");
    assert_eq!(
        bjy(&["check", "--backend", "exhaustive", &clean]).status.code(),
        Some(0)
    );
}

#[test]
fn bench_over_an_empty_corpus_prints_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = bjy(&["bench", &dir.path().to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("test"));
}

#[test]
fn bench_flags_mismatched_expectations() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "wrong.bjy", "let id (x : bool) : bool = 1 in id");
    write(dir.path(), "wrong.expect", "no-error\n");
    let o = bjy(&["bench", &dir.path().to_string_lossy()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("wrong"));
}

#[test]
fn dump_prints_parseable_core() {
    let o = bjy(&["dump", &corpus("id_bool.bjy")]);
    assert_eq!(o.status.code(), Some(0));
    let core = stdout(&o);
    assert!(bjy::syntax::parse_core(&core).is_ok(), "{core}");
}
