use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Duration;

use bjy::corpus::{check_entry, load_corpus, validate_corpus, Expected, FEATURES};
use bjy::{replay, search, InstrumentConfig, Program, SearchConfig};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn cfg(seed: u64) -> SearchConfig {
    SearchConfig {
        seed,
        timeout: Duration::from_secs(60),
        ..SearchConfig::default()
    }
}

#[test]
fn every_feature_appears_in_an_error_entry() {
    let entries = load_corpus(&corpus_dir()).unwrap();
    let used: BTreeSet<char> = entries
        .iter()
        .filter(|e| e.expected == Expected::Error)
        .flat_map(|e| e.features.iter().copied())
        .collect();
    let missing: String = FEATURES.chars().filter(|c| !used.contains(c)).collect();
    assert!(missing.is_empty(), "no error entry uses {missing}");
}

#[test]
fn every_entry_matches_its_expected_verdict() {
    let results = validate_corpus(&corpus_dir(), &InstrumentConfig::default(), &cfg(0)).unwrap();
    assert!(results.len() >= 20);
    for r in &results {
        assert!(
            r.matched(),
            "{}: expected {}, got {}",
            r.name,
            r.expected.label(),
            r.verdict()
        );
    }
}

#[test]
fn errors_are_found_across_seeds_and_witnesses_replay() {
    let icfg = InstrumentConfig::default();
    for e in load_corpus(&corpus_dir()).unwrap() {
        if e.expected != Expected::Error {
            continue;
        }
        let p = Program::from_source(&e.source, &icfg).unwrap();
        for seed in [1, 2, 3] {
            let report = search(&p, &cfg(seed)).unwrap();
            let r = report
                .refutation()
                .unwrap_or_else(|| panic!("{} seed {seed}: {}", e.name, report.human()));
            let (o, _) = replay(&p.expr, &r.witness, 50_000).unwrap();
            assert!(o.is_error(), "{} seed {seed}: witness replayed to {o:?}", e.name);
        }
    }
}

#[test]
fn well_typed_entries_stay_clean_without_wrapping() {
    let icfg = InstrumentConfig {
        wrap_enabled: false,
        ..InstrumentConfig::default()
    };
    for e in load_corpus(&corpus_dir()).unwrap() {
        if e.expected == Expected::NoError {
            let r = check_entry(&e, &icfg, &cfg(0));
            assert!(r.matched(), "{}: {}", e.name, r.verdict());
        }
    }
}
