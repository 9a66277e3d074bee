//! Shared inputs for the pipeline benchmarks.

use std::path::PathBuf;

use bjy::corpus::{load_corpus, CorpusEntry};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// The named corpus entries, in the order given.
pub fn entries(names: &[&str]) -> Vec<CorpusEntry> {
    let all = load_corpus(&corpus_dir()).expect("corpus loads");
    names
        .iter()
        .map(|n| {
            all.iter()
                .find(|e| e.name == *n)
                .unwrap_or_else(|| panic!("no corpus entry {n}"))
                .clone()
        })
        .collect()
}
