use super::*;
use crate::instrument::{InstrumentConfig, Program};
use crate::interp::{replay, run, Feed, RunConfig};
use crate::solver::{Solver, SolverChoice};

const APPL_INT: &str = "let appl_int (fn : int -> int) : int = \
     let res = fn 1 in if res != 32767 then fn 0 else (res - 1) < 0 in appl_int";

fn program(src: &str) -> Program {
    Program::from_source(src, &InstrumentConfig::default()).unwrap()
}

fn cfg(seed: u64) -> SearchConfig {
    SearchConfig {
        seed,
        timeout: std::time::Duration::from_secs(60),
        ..SearchConfig::default()
    }
}

#[test]
fn id_bool_is_refuted() {
    let p = program("let id (x : bool) : bool = 1 in id");
    let r = search(&p, &cfg(0)).unwrap();
    let refutation = r.refutation().expect("error found");
    let (o, _) = replay(&p.expr, &refutation.witness, 50_000).unwrap();
    assert!(o.is_error());
    let b = refutation.blame.as_ref().unwrap();
    assert_eq!(b.expected, "(bool -> bool)");
    assert_eq!(b.actual, "(bool -> int)");
    let text = r.human();
    assert!(text.starts_with(HEADER));
    assert!(text.contains("* Expected : (bool -> bool)"));
    assert!(text.contains("* Actual   : (bool -> int)"));
}

#[test]
fn a_constant_is_exhausted_in_one_run() {
    let r = search(&program("42"), &cfg(0)).unwrap();
    assert!(matches!(r.verdict, Verdict::Exhausted));
    assert_eq!(r.stats.runs, 1);
    assert_eq!(r.human().trim(), NO_ERRORS);
}

#[test]
fn appl_int_is_refuted_through_the_solver() {
    let p = program(APPL_INT);
    for seed in 0..3 {
        let r = search(&p, &cfg(seed)).unwrap();
        let w = &r.refutation().expect("error found").witness;
        assert!(w.iter().any(|(_, v)| v.to_string() == "32767"), "{}", w.to_text());
    }
}

#[test]
fn well_typed_branching_is_exhausted() {
    let src = "let f (x : int) : int = if x > 3 then x - 1 else x + 1 in f";
    let r = search(&program(src), &cfg(1)).unwrap();
    assert!(matches!(r.verdict, Verdict::Exhausted), "{}", r.human());
}

#[test]
fn transform_record_has_no_error() {
    let src = "let (r : {a : int; b : int}) = {a = 1; b = 2} in \
        let transform_record (r : {a : int}) : {a : int; c : bool} = {a = r.a; c = true} in \
        let (new_record : {c : bool}) = transform_record r in new_record";
    let r = search(&program(src), &cfg(0)).unwrap();
    assert!(!r.found_error(), "{}", r.human());
}

#[test]
fn structured_output_has_one_field_per_line() {
    let r = search(&program("let id (x : bool) : bool = 1 in id"), &cfg(0)).unwrap();
    let s = r.structured(Some(std::path::Path::new("w.feed")));
    assert!(s.lines().any(|l| l == "verdict=error-found"));
    assert!(s.lines().any(|l| l == "witness=w.feed"));
    assert!(s.lines().all(|l| l.contains('=')));
}

#[test]
fn searches_are_reproducible() {
    let p = program(APPL_INT);
    let a = search(&p, &cfg(7)).unwrap();
    let b = search(&p, &cfg(7)).unwrap();
    assert_eq!(a.stats.runs, b.stats.runs);
    assert_eq!(a.stats.solver_queries, b.stats.solver_queries);
    assert_eq!(
        a.refutation().unwrap().witness.to_text(),
        b.refutation().unwrap().witness.to_text()
    );
}

fn symbolic_run(p: &Program, seed: u64) -> crate::interp::Run {
    let mut rc = RunConfig::new(50_000);
    rc.symbolic = Some(60);
    run(&p.expr, &mut Feed::random(seed), &rc).unwrap()
}

#[test]
fn targets_come_from_fresh_branches_only() {
    let straight = program("let f x = x + 1 in f 2");
    let r = symbolic_run(&straight, 0);
    let mut tree = PathTree::new();
    let s = r.session.unwrap();
    tree.merge(&s).unwrap();
    assert!(acquire_targets(&s, &r.trace, &tree).is_empty());

    let p = program("let f (x : int) : int = if x > 0 then 1 else 2 in f");
    let r = symbolic_run(&p, 0);
    let s = r.session.unwrap();
    tree = PathTree::new();
    tree.merge(&s).unwrap();
    let ts = acquire_targets(&s, &r.trace, &tree);
    let mut q = TargetQueues::new();
    let pushed = ts.iter().filter(|t| q.push((*t).clone())).count();
    assert_eq!(pushed, ts.len());
    assert!(!ts.is_empty());
    // The same run again adds nothing.
    tree.merge(&s).unwrap();
    let again = acquire_targets(&s, &r.trace, &tree);
    assert_eq!(again.into_iter().filter(|t| q.push(t.clone())).count(), 0);
}

#[test]
fn solved_targets_are_reached_by_the_next_run() {
    let p = program("let f (x : int) : int = if x > 0 then 1 else 2 in f");
    let r = symbolic_run(&p, 3);
    let s = r.session.unwrap();
    let mut tree = PathTree::new();
    tree.merge(&s).unwrap();
    let mut solver = Solver::new(SolverChoice::Hybrid, crate::solver::SmtSolver::discover()).unwrap();
    for t in acquire_targets(&s, &r.trace, &tree) {
        match solve_target(&t, &mut tree, &mut solver, 0) {
            Solved::Sat(feed) => {
                let mut rc = RunConfig::new(50_000);
                rc.symbolic = Some(60);
                let mut f = feed;
                let next = run(&p.expr, &mut f, &rc).unwrap();
                tree.merge(next.session.as_ref().unwrap()).unwrap();
                assert_eq!(tree.status(&t.path), Some(Status::Hit));
            }
            Solved::Unsat => assert_eq!(tree.status(&t.path), Some(Status::Unsatisfiable)),
            Solved::Unknown => panic!("tiny query left undecided"),
        }
    }
}

#[test]
fn comparison_results_are_boolean_in_queries() {
    use crate::solver::{Formula, Sort};
    let p = program("let f (x : int) (y : int) : bool = (x <= y) && true in f");
    let s = symbolic_run(&p, 0).session.unwrap();
    let defs: Vec<Sort> = s
        .formulas
        .iter()
        .filter_map(|f| match f {
            Formula::Def(v, _) => Some(v.sort()),
            Formula::Assert(_) => None,
        })
        .collect();
    assert!(!defs.is_empty());
    assert!(defs.iter().all(|s| *s == Sort::Bool), "{defs:?}");
}
