use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use crate::interp::Feed;

/// The declaration an error was attributed to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blame {
    pub name: String,
    pub clause: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug)]
pub struct Refutation {
    /// Replays to `ERROR`; checked before the report is built.
    pub witness: Feed,
    /// `None` when the error was raised outside every declaration's check.
    pub blame: Option<Blame>,
    /// The run, counting from 1, that reached the error.
    pub run: u64,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    ErrorFound(Box<Refutation>),
    /// Every path was explored and every branch decided.
    Exhausted,
    /// Every target up to this depth was tried, but some runs or queries
    /// were inconclusive.
    ExhaustedAtDepth(usize),
    Timeout,
}

/// Why a search that found nothing cannot claim exhaustion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Incomplete {
    /// A run hit the step budget.
    StepLimit,
    /// A run had more symbolic branches than the tree depth allows.
    Truncated,
    /// A pick-dependent value could not be expressed to the solver.
    Untracked,
    SolverUnknown,
    /// A satisfiable target was not reached by the run built from its model.
    Missed,
}

impl Incomplete {
    pub fn label(self) -> &'static str {
        match self {
            Incomplete::StepLimit => "step-limit",
            Incomplete::Truncated => "depth-limit",
            Incomplete::Untracked => "untracked-values",
            Incomplete::SolverUnknown => "solver-unknown",
            Incomplete::Missed => "missed-targets",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub runs: u64,
    pub solver_queries: u64,
    pub smt_calls: u64,
    pub step_limited: u64,
    pub mzero: u64,
    pub missed: u64,
    pub tree_nodes: usize,
    pub depth_cap: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub verdict: Verdict,
    pub stats: SearchStats,
    pub incomplete: Vec<Incomplete>,
}

pub const HEADER: &str = "** Bluejay Type Errors **";
pub const NO_ERRORS: &str = "No errors found";
const RULE: &str = "--------------------";

impl Report {
    pub fn found_error(&self) -> bool {
        matches!(self.verdict, Verdict::ErrorFound(_))
    }

    pub fn refutation(&self) -> Option<&Refutation> {
        match &self.verdict {
            Verdict::ErrorFound(r) => Some(r),
            _ => None,
        }
    }

    pub fn verdict_label(&self) -> &'static str {
        match self.verdict {
            Verdict::ErrorFound(_) => "error-found",
            Verdict::Exhausted => "exhausted",
            Verdict::ExhaustedAtDepth(_) => "exhausted-at-depth",
            Verdict::Timeout => "timeout",
        }
    }

    /// The report as a person reads it.
    pub fn human(&self) -> String {
        let mut s = String::new();
        match &self.verdict {
            Verdict::ErrorFound(r) => {
                let (clause, value, expected, actual) = match &r.blame {
                    Some(b) => (
                        b.clause.as_str(),
                        b.name.as_str(),
                        b.expected.as_str(),
                        b.actual.as_str(),
                    ),
                    None => (
                        "(outside every typed declaration)",
                        "-",
                        "-",
                        "ERROR raised by an operation",
                    ),
                };
                let _ = writeln!(s, "{HEADER}");
                let _ = writeln!(s, "- Found at clause : {clause}");
                let _ = writeln!(s, "{RULE}");
                let _ = writeln!(s, "* Value    : {value}");
                let _ = writeln!(s, "* Expected : {expected}");
                let _ = writeln!(s, "* Actual   : {actual}");
            }
            Verdict::Exhausted => {
                let _ = writeln!(s, "{NO_ERRORS}");
            }
            Verdict::ExhaustedAtDepth(d) => {
                let _ = writeln!(s, "{NO_ERRORS}");
                let _ = writeln!(
                    s,
                    "(searched every path up to {d} branches; not exhaustive: {})",
                    self.incomplete_text()
                );
            }
            Verdict::Timeout => {
                let _ = writeln!(s, "{NO_ERRORS}");
                let _ = writeln!(
                    s,
                    "(stopped after {:.1} s and {} runs; search incomplete)",
                    self.stats.elapsed.as_secs_f64(),
                    self.stats.runs
                );
            }
        }
        s
    }

    fn incomplete_text(&self) -> String {
        self.incomplete.iter().map(|i| i.label()).collect::<Vec<_>>().join(", ")
    }

    /// One `key=value` line per field. Newlines inside values are escaped.
    pub fn structured(&self, witness_path: Option<&Path>) -> String {
        let mut fields: Vec<(&str, String)> = vec![("verdict", self.verdict_label().into())];
        match &self.verdict {
            Verdict::ErrorFound(r) => {
                if let Some(b) = &r.blame {
                    fields.push(("value", b.name.clone()));
                    fields.push(("clause", b.clause.clone()));
                    fields.push(("expected", b.expected.clone()));
                    fields.push(("actual", b.actual.clone()));
                }
                let w = witness_path.map_or("-".into(), |p| p.display().to_string());
                fields.push(("witness", w));
                fields.push(("witness_picks", r.witness.len().to_string()));
            }
            Verdict::ExhaustedAtDepth(d) => {
                fields.push(("depth", d.to_string()));
                fields.push(("incomplete", self.incomplete_text()));
            }
            _ => {}
        }
        let st = &self.stats;
        fields.extend([
            ("runs", st.runs.to_string()),
            ("solver_queries", st.solver_queries.to_string()),
            ("smt_calls", st.smt_calls.to_string()),
            ("step_limited", st.step_limited.to_string()),
            ("tree_nodes", st.tree_nodes.to_string()),
            ("depth_cap", st.depth_cap.to_string()),
            ("wall_ms", st.elapsed.as_millis().to_string()),
        ]);
        let mut s = String::new();
        for (k, v) in fields {
            let _ = writeln!(s, "{k}={}", v.replace('\\', "\\\\").replace('\n', "\\n"));
        }
        s
    }
}
