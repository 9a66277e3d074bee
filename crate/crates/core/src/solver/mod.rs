//! Path constraints and the backends that solve them.

mod encode;
mod enumerate;
mod formula;
mod smtlib;

pub use encode::{encode_clause, CtorIndex, LabelIndex, Unsupported};
pub use enumerate::Enumerator;
pub use formula::{free_vars, slice, Formula, Model, SolverResult, Sort, Term, Val, Var};
pub use smtlib::{script, term_to_smt, SmtSolver, SOLVER_ENV};

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("solver unavailable: {0}")]
    Unavailable(String),
    #[error("solver protocol error: {0}")]
    Protocol(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverChoice {
    /// An external SMT-LIB2 solver only.
    Smt,
    /// Bounded enumeration only; no external process.
    Enumerator,
    /// Enumeration first, then the SMT solver when enumeration is
    /// inconclusive.
    #[default]
    Hybrid,
}

impl FromStr for SolverChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "smt" => Ok(SolverChoice::Smt),
            "enum" | "enumerator" => Ok(SolverChoice::Enumerator),
            "hybrid" => Ok(SolverChoice::Hybrid),
            other => Err(format!("unknown backend `{other}` (expected smt, enum or hybrid)")),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::Smt => "smt",
            SolverChoice::Enumerator => "enum",
            SolverChoice::Hybrid => "hybrid",
        })
    }
}

/// Bounds on integer picks in SMT queries, keeping witnesses well inside
/// the interpreter's 64-bit arithmetic.
pub const SMT_PICK_BOUND: i64 = 1 << 31;

#[derive(Clone, Debug, Default)]
pub struct SolverStats {
    pub queries: u64,
    pub sat: u64,
    pub unsat: u64,
    pub unknown: u64,
    pub smt_calls: u64,
    pub time: Duration,
}

/// Front end used by the search: slices each query to the relevant cone,
/// dispatches to the configured backend and completes models so every free
/// variable of the original query is assigned.
#[derive(Debug)]
pub struct Solver {
    choice: SolverChoice,
    smt: Option<SmtSolver>,
    pub enumerator: Enumerator,
    pub stats: SolverStats,
    /// When set, every query is appended here as given.
    pub log: Option<Vec<Vec<Formula>>>,
}

impl Solver {
    /// Fails for [`SolverChoice::Smt`] without a solver binary. Hybrid
    /// without one degrades to enumeration.
    pub fn new(choice: SolverChoice, smt: Option<SmtSolver>) -> Result<Self, SolverError> {
        if choice == SolverChoice::Smt && smt.is_none() {
            return Err(SolverError::Unavailable(format!(
                "no SMT solver found; set {SOLVER_ENV} or install z3"
            )));
        }
        let smt = smt.map(|mut s| {
            s.int_bounds.get_or_insert((-SMT_PICK_BOUND, SMT_PICK_BOUND));
            s
        });
        Ok(Solver {
            choice,
            smt: if choice == SolverChoice::Enumerator { None } else { smt },
            enumerator: Enumerator::default(),
            stats: SolverStats::default(),
            log: None,
        })
    }

    pub fn enumerator_only() -> Self {
        Solver::new(SolverChoice::Enumerator, None).expect("enumerator needs no binary")
    }

    pub fn choice(&self) -> SolverChoice {
        self.choice
    }

    pub fn has_smt(&self) -> bool {
        self.smt.is_some()
    }

    pub fn check(&mut self, formulas: &[Formula]) -> Result<SolverResult, SolverError> {
        if let Some(log) = self.log.as_mut() {
            log.push(formulas.to_vec());
        }
        let start = Instant::now();
        let result = self.dispatch(formulas);
        self.stats.time += start.elapsed();
        self.stats.queries += 1;
        match &result {
            Ok(SolverResult::Sat(_)) => self.stats.sat += 1,
            Ok(SolverResult::Unsat) => self.stats.unsat += 1,
            _ => self.stats.unknown += 1,
        }
        result
    }

    fn dispatch(&mut self, formulas: &[Formula]) -> Result<SolverResult, SolverError> {
        let sliced = slice(formulas);
        let closed_false = sliced
            .iter()
            .any(|f| matches!(f, Formula::Assert(t) if t.eval(&|_| None) == Some(Val::Bool(false))));
        if closed_false {
            return Ok(SolverResult::Unsat);
        }
        let enumerated = match self.choice {
            SolverChoice::Smt => SolverResult::Unknown,
            _ => self.enumerator.check(&sliced),
        };
        let result = match enumerated {
            SolverResult::Sat(m) => SolverResult::Sat(m),
            bounded => match self.smt.as_mut() {
                Some(smt) => {
                    self.stats.smt_calls += 1;
                    smt.check(&sliced)?
                }
                // Exhausting a bounded range proves nothing.
                None if bounded == SolverResult::Unsat && !has_unbounded(&sliced) => SolverResult::Unsat,
                None => SolverResult::Unknown,
            },
        };
        Ok(match result {
            SolverResult::Sat(mut m) => {
                if !m.satisfies(&sliced) {
                    return Ok(SolverResult::Unknown);
                }
                for v in free_vars(formulas) {
                    m.0.entry(v.clone()).or_insert(default_val(v.sort()));
                }
                SolverResult::Sat(m)
            }
            other => other,
        })
    }
}

/// Whether any free variable ranges over more values than enumeration
/// tries.
fn has_unbounded(formulas: &[Formula]) -> bool {
    free_vars(formulas)
        .iter()
        .any(|v| matches!(v.sort(), Sort::Int | Sort::Fun))
}

/// The value a variable gets when the query does not constrain it.
pub fn default_val(sort: Sort) -> Val {
    match sort {
        Sort::Int | Sort::Fun => Val::Int(0),
        Sort::Bool => Val::Bool(false),
        Sort::Bits(_) => Val::Bits(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{ident, ClauseKey};

    fn v(name: &str, sort: Sort) -> Var {
        Var::new(ClauseKey::new(&ident(name), 0), sort)
    }

    #[test]
    fn models_are_completed_with_defaults() {
        let x = v("x", Sort::Int);
        let b = v("b", Sort::Bool);
        let c = v("c", Sort::Bool);
        let fs = vec![
            Formula::Def(c.clone(), Term::not(Term::var(&b))),
            Formula::Assert(Term::gt(Term::var(&x), Term::Int(4))),
        ];
        let mut s = Solver::enumerator_only();
        let SolverResult::Sat(m) = s.check(&fs).unwrap() else {
            panic!()
        };
        assert_eq!(m.get(&x), Some(Val::Int(5)));
        assert_eq!(m.get(&b), Some(Val::Bool(false)));
    }

    #[test]
    fn enumerator_alone_never_claims_unsat_over_integers() {
        let x = v("x", Sort::Int);
        let fs = vec![Formula::Assert(Term::gt(Term::var(&x), Term::Int(1000)))];
        assert_eq!(Solver::enumerator_only().check(&fs).unwrap(), SolverResult::Unknown);
        let b = v("b", Sort::Bool);
        let fs = vec![Formula::Assert(Term::and(Term::var(&b), Term::not(Term::var(&b))))];
        assert_eq!(Solver::enumerator_only().check(&fs).unwrap(), SolverResult::Unsat);
    }

    #[test]
    fn smt_choice_requires_a_binary() {
        assert!(Solver::new(SolverChoice::Smt, None).is_err());
        assert_eq!("enum".parse::<SolverChoice>().unwrap(), SolverChoice::Enumerator);
    }

    #[test]
    fn smt_backend_when_available() {
        let Some(smt) = SmtSolver::discover() else {
            eprintln!("no SMT solver on PATH; skipping");
            return;
        };
        let x = v("x", Sort::Int);
        let fs = vec![Formula::Assert(Term::gt(Term::var(&x), Term::Int(1000)))];
        let mut s = Solver::new(SolverChoice::Smt, Some(smt)).unwrap();
        let SolverResult::Sat(m) = s.check(&fs).unwrap() else {
            panic!()
        };
        assert!(m.satisfies(&fs));
        let fs = vec![
            Formula::Assert(Term::gt(Term::var(&x), Term::Int(3))),
            Formula::Assert(Term::lt(Term::var(&x), Term::Int(2))),
        ];
        assert_eq!(s.check(&fs).unwrap(), SolverResult::Unsat);
    }
}
