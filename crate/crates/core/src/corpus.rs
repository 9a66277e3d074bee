//! Benchmark programs with expected verdicts.
//!
//! An entry is `<name>.bjy` next to `<name>.expect`, which holds one line:
//! `error` or `no-error`. The program's leading comment may carry
//! `features: <letters>` and `origin: <note>` lines.
//!
//! Feature letters: P polymorphism, V variants, I intersections, R recursive
//! functions, M recursive types, H higher-order functions, S subtyping,
//! T type casing, O object-style records, F refinements, D dependent types,
//! A explicit type parameters, C records, W needs use-site wrapping,
//! N assertions, U operator misuse, Y wrong return type, X pattern matching.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::concolic::{search, Report, SearchConfig, SearchError};
use crate::instrument::{InstrumentConfig, Program};

pub const FEATURES: &str = "PVIRMHSTOFDACWNUYX";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Error,
    NoError,
}

impl Expected {
    pub fn parse(s: &str) -> Option<Expected> {
        match s.trim() {
            "error" => Some(Expected::Error),
            "no-error" => Some(Expected::NoError),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Expected::Error => "error",
            Expected::NoError => "no-error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub path: PathBuf,
    pub source: String,
    pub expected: Expected,
    pub features: Vec<char>,
    pub origin: String,
}

impl CorpusEntry {
    /// Non-blank lines outside the leading comment block.
    pub fn loc(&self) -> usize {
        self.source
            .lines()
            .filter(|l| {
                let t = l.trim();
                !t.is_empty() && !(t.starts_with("(*") && t.ends_with("*)"))
            })
            .count()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}: expected `error` or `no-error`")]
    BadExpect(PathBuf),
    #[error("{0}: unknown feature letter `{1}`")]
    BadFeature(PathBuf, char),
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Header fields from lines like `(* features: P R *)`.
fn header<'s>(source: &'s str, key: &str) -> Option<&'s str> {
    source.lines().find_map(|l| {
        let l = l.trim().strip_prefix("(*")?.strip_suffix("*)")?.trim();
        l.strip_prefix(key)?.strip_prefix(':').map(str::trim)
    })
}

pub fn load_entry(path: &Path) -> Result<CorpusEntry, CorpusError> {
    let source = read(path)?;
    let expect_path = path.with_extension("expect");
    let expected = Expected::parse(&read(&expect_path)?).ok_or(CorpusError::BadExpect(expect_path))?;
    let mut features = Vec::new();
    for c in header(&source, "features")
        .unwrap_or("")
        .chars()
        .filter(|c| !c.is_whitespace())
    {
        if !FEATURES.contains(c) {
            return Err(CorpusError::BadFeature(path.to_owned(), c));
        }
        features.push(c);
    }
    Ok(CorpusEntry {
        name: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        path: path.to_owned(),
        origin: header(&source, "origin").unwrap_or("").to_owned(),
        source,
        expected,
        features,
    })
}

/// Every `.bjy` file in the directory, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bjy"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_entry(p)).collect()
}

#[derive(Debug)]
pub struct EntryResult {
    pub name: String,
    pub expected: Expected,
    /// The search report, or why there is none.
    pub outcome: Result<Report, String>,
    pub translate: Duration,
    pub search: Duration,
    pub loc: usize,
}

impl EntryResult {
    pub fn matched(&self) -> bool {
        match &self.outcome {
            Ok(r) => r.found_error() == (self.expected == Expected::Error),
            Err(_) => false,
        }
    }

    pub fn verdict(&self) -> &str {
        match &self.outcome {
            Ok(r) => r.verdict_label(),
            Err(_) => "failed",
        }
    }
}

/// Instruments and searches one entry, timing both phases.
pub fn check_entry(e: &CorpusEntry, icfg: &InstrumentConfig, scfg: &SearchConfig) -> EntryResult {
    let t0 = Instant::now();
    let program = Program::from_source(&e.source, icfg);
    let translate = t0.elapsed();
    let t1 = Instant::now();
    let outcome = match program {
        Ok(p) => search(&p, scfg).map_err(|err: SearchError| err.to_string()),
        Err(err) => Err(err.to_string()),
    };
    EntryResult {
        name: e.name.clone(),
        expected: e.expected,
        outcome,
        translate,
        search: t1.elapsed(),
        loc: e.loc(),
    }
}

/// Checks every entry of a corpus directory.
pub fn validate_corpus(
    dir: &Path,
    icfg: &InstrumentConfig,
    scfg: &SearchConfig,
) -> Result<Vec<EntryResult>, CorpusError> {
    Ok(load_corpus(dir)?.iter().map(|e| check_entry(e, icfg, scfg)).collect())
}
