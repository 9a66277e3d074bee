//! Deterministic interpreter for the full language, instrumentation forms
//! included. Nondeterminism comes only from picks, which a [`Feed`]
//! resolves by clause key.

mod eval;
mod feed;
mod value;

pub use eval::{run, Branch, Outcome, Run, RunConfig, SymBranch, SymSession, Trace};
pub use feed::{Fallback, Feed, FeedMiss, FeedParseError, PickKind, PickValue};
pub use value::{matches, Closure, Env, MatchResult, RecordValue, Slot, Value};

use crate::syntax::Expr;

/// Concrete evaluation with a step budget. Misses fall back according to
/// the feed's policy; a replay feed that misses yields `Err`.
pub fn eval(e: &Expr, feed: &mut Feed, step_budget: u64) -> Result<(Outcome, Trace), FeedMiss> {
    let r = run(e, feed, &RunConfig::new(step_budget))?;
    Ok((r.outcome, r.trace))
}

/// Re-runs a recorded feed, failing on any pick the recording lacks.
pub fn replay(e: &Expr, feed: &Feed, step_budget: u64) -> Result<(Outcome, Trace), FeedMiss> {
    let mut f = feed.clone().into_replay();
    eval(e, &mut f, step_budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{ident, normalize, parse, parse_core, ClauseKey};

    fn core(src: &str) -> Expr {
        parse_core(src).unwrap_or_else(|e| panic!("{src}: {e}"))
    }

    fn out(e: &Expr, feed: &mut Feed) -> Outcome {
        eval(e, feed, 10_000).unwrap().0
    }

    fn pick_site(e: &Expr) -> crate::syntax::Ident {
        let mut s = None;
        e.walk(&mut |e| {
            if let Expr::PickInt(x) | Expr::PickBool(x) = e {
                s.get_or_insert(x.clone());
            }
        });
        s.unwrap()
    }

    #[test]
    fn primitive_type_errors() {
        assert!(out(&core("1 + true"), &mut Feed::zero()).is_error());
        assert!(out(&core("if 1 then 2 else 3"), &mut Feed::zero()).is_error());
        assert!(out(&core("1 2"), &mut Feed::zero()).is_error());
        assert!(out(&core("not 3"), &mut Feed::zero()).is_error());
        assert!(out(&core("9223372036854775807 + 1"), &mut Feed::zero()).is_error());
    }

    #[test]
    fn retag_hides_labels() {
        let e = core("(retag({a = 1; b = 2}, {a})).b");
        assert!(out(&e, &mut Feed::zero()).is_error());
        let e = core("(retag({a = 1; b = 2}, {a})).a");
        assert!(matches!(out(&e, &mut Feed::zero()), Outcome::Value(Value::Int(1))));
        let e = core("retag({a = 1}, {a; b})");
        assert!(out(&e, &mut Feed::zero()).is_error());
        let e = core("(retag(retag({a = 1; b = 2}, {a}), {a; b})).b");
        assert!(matches!(out(&e, &mut Feed::zero()), Outcome::Value(Value::Int(2))));
    }

    #[test]
    fn picks_follow_the_feed() {
        let e = core("if pick_b then 1 else ERROR");
        let key = ClauseKey::new(&pick_site(&e), 0);
        let mut f = Feed::replay();
        f.insert(key.clone(), PickValue::Bool(false));
        assert!(out(&e, &mut f).is_error());
        f.insert(key, PickValue::Bool(true));
        assert!(matches!(out(&e, &mut f), Outcome::Value(Value::Int(1))));
    }

    #[test]
    fn omega_hits_the_step_limit() {
        let e = parse("(fun x -> x x) (fun x -> x x)").unwrap();
        assert!(matches!(out(&e, &mut Feed::zero()), Outcome::StepLimit(_)));
        let e = parse("let rec f n = f n in f 0").unwrap();
        assert!(matches!(out(&e, &mut Feed::zero()), Outcome::StepLimit(_)));
    }

    #[test]
    fn mzero_aborts() {
        let e = core("let x = mzero in ERROR");
        assert!(matches!(out(&e, &mut Feed::zero()), Outcome::MZero));
    }

    #[test]
    fn untouchables() {
        assert!(matches!(
            out(&core("V('a$1) ~= 'a$1"), &mut Feed::zero()),
            Outcome::Value(Value::Bool(true))
        ));
        assert!(matches!(
            out(&core("V('a$1) ~= 'b$2"), &mut Feed::zero()),
            Outcome::Value(Value::Bool(false))
        ));
        assert!(out(&core("V('a$1) ~ int"), &mut Feed::zero()).is_error());
        assert!(out(&core("V('a$1) + 1"), &mut Feed::zero()).is_error());
    }

    #[test]
    fn truncated_feed_misses_on_replay() {
        let e = core("let x = pick_i in let y = pick_i in x + y");
        let (o, trace) = eval(&e, &mut Feed::random(3), 1000).unwrap();
        let feed = trace.feed();
        let (o2, t2) = replay(&e, &feed, 1000).unwrap();
        assert!(o.agrees_with(&o2));
        assert!(trace.same_path(&t2));
        let mut short = feed.clone();
        short.truncate(1);
        assert!(replay(&e, &short, 1000).is_err());
    }

    #[test]
    fn recursion_uses_fresh_depths() {
        let e =
            normalize(&parse("let rec f n = if n < 1 then 0 else (let x = input in x + f (n - 1)) in f 3").unwrap());
        let (_, trace) = eval(&e, &mut Feed::zero(), 10_000).unwrap();
        let depths: Vec<u32> = trace.picks.iter().map(|(k, _)| k.depth).collect();
        assert_eq!(depths.len(), 3);
        let mut sorted = depths.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 3);
    }

    #[test]
    fn symbolic_session_tracks_dependent_branches() {
        let e = normalize(&core("let x = pick_i in let y = x + 1 in if y == 5 then ERROR else 0"));
        let mut f = Feed::zero();
        let mut cfg = RunConfig::new(1000);
        cfg.symbolic = Some(10);
        let r = run(&e, &mut f, &cfg).unwrap();
        let s = r.session.unwrap();
        assert_eq!(s.path.len(), 1);
        assert!(!s.path[0].dir);
        let q = s.query(0, true);
        let mut solver = crate::solver::Solver::enumerator_only();
        let crate::solver::SolverResult::Sat(m) = solver.check(&q).unwrap() else {
            panic!()
        };
        let (k, v) = m.0.iter().next().unwrap();
        assert_eq!(*v, crate::solver::Val::Int(4));
        let mut f = Feed::replay();
        f.insert(k.key.clone(), PickValue::Int(4));
        assert!(out(&e, &mut f).is_error());
    }

    #[test]
    fn watched_lets_are_recorded() {
        let e = core("let r$1 = 3 + 4 in r$1");
        let mut cfg = RunConfig::new(100);
        cfg.watch.insert(ident("r$1"));
        let r = run(&e, &mut Feed::zero(), &cfg).unwrap();
        assert_eq!(r.trace.watched.len(), 1);
        assert!(r.trace.watched[0].1.same(&Value::Int(7)));
    }

    #[test]
    fn lists_variants_and_matching() {
        let e = parse("match 1 :: 2 :: [] with [] -> 0 | h :: t -> (match t with h2 :: _ -> h + h2 | _ -> 9)").unwrap();
        assert!(matches!(out(&e, &mut Feed::zero()), Outcome::Value(Value::Int(3))));
        let e = parse("match Node 5 with Leaf -> 0 | Node n -> n").unwrap();
        assert!(matches!(out(&e, &mut Feed::zero()), Outcome::Value(Value::Int(5))));
        let e = parse("match true with int -> 1").unwrap();
        assert!(out(&e, &mut Feed::zero()).is_error());
    }
}
