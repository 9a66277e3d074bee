//! Reference refuters used to check the concolic search: bounded
//! enumeration of every feed, and plain random testing.

pub mod programs;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::interp::{replay, run, Feed, Outcome, PickKind, PickValue, RunConfig};
use crate::syntax::{ClauseKey, Expr};

#[derive(Clone, Debug)]
pub struct EnumBounds {
    /// Inclusive range of integer picks.
    pub int_range: (i64, i64),
    /// Most picks a single run may make.
    pub max_picks: usize,
    /// Most runs in total.
    pub max_feeds: u64,
    pub step_budget: u64,
}

impl Default for EnumBounds {
    fn default() -> Self {
        EnumBounds {
            int_range: (-16, 16),
            max_picks: 8,
            max_feeds: 200_000,
            step_budget: 50_000,
        }
    }
}

#[derive(Clone, Debug)]
pub enum EnumVerdict {
    /// The first erroring feed in enumeration order.
    Refuted(Feed),
    /// No feed within bounds errs. `complete` when no run was cut off by
    /// `max_picks` or the step budget.
    NoErrorWithinBounds {
        runs: u64,
        complete: bool,
    },
    BudgetExceeded {
        runs: u64,
    },
}

impl EnumVerdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, EnumVerdict::Refuted(_))
    }
}

/// Candidate values for a pick, ordered by magnitude: 0, -1, 1, -2, ...
fn domain(kind: PickKind, (lo, hi): (i64, i64)) -> Vec<PickValue> {
    match kind {
        PickKind::Bool => vec![PickValue::Bool(false), PickValue::Bool(true)],
        PickKind::Int => {
            let mut v: Vec<i64> = (lo..=hi).collect();
            v.sort_by_key(|n| (n.unsigned_abs(), *n > 0));
            v.into_iter().map(PickValue::Int).collect()
        }
    }
}

/// Enumerates feeds cheapest first, where a feed costs one per pick plus
/// the rank of each value in its domain. Every feed within bounds is
/// eventually run, and the order is deterministic.
pub fn exhaustive_refute(p: &Expr, b: &EnumBounds) -> EnumVerdict {
    type Partial = Vec<(ClauseKey, PickValue)>;
    let mut frontier: BinaryHeap<Reverse<(u64, u64, usize)>> = BinaryHeap::new();
    let mut store: Vec<Partial> = vec![Vec::new()];
    let mut seq = 0;
    frontier.push(Reverse((0, 0, 0)));
    let cfg = RunConfig::new(b.step_budget);
    let mut runs = 0;
    let mut complete = true;
    while let Some(Reverse((cost, _, id))) = frontier.pop() {
        if runs >= b.max_feeds {
            return EnumVerdict::BudgetExceeded { runs };
        }
        let partial = std::mem::take(&mut store[id]);
        let mut feed = Feed::replay();
        for (k, v) in &partial {
            feed.insert(k.clone(), *v);
        }
        runs += 1;
        match run(p, &mut feed, &cfg) {
            Ok(r) => match r.outcome {
                Outcome::Error => return EnumVerdict::Refuted(r.trace.feed()),
                Outcome::StepLimit(_) => complete = false,
                Outcome::Value(_) | Outcome::MZero => {}
            },
            Err(_) if partial.len() >= b.max_picks => complete = false,
            Err(miss) => {
                for (rank, v) in domain(miss.kind, b.int_range).into_iter().enumerate() {
                    let mut next = partial.clone();
                    next.push((miss.key.clone(), v));
                    seq += 1;
                    store.push(next);
                    frontier.push(Reverse((cost + 1 + rank as u64, seq, store.len() - 1)));
                }
            }
        }
    }
    EnumVerdict::NoErrorWithinBounds { runs, complete }
}

#[derive(Clone, Debug)]
pub enum FuzzVerdict {
    /// A replay-verified erroring feed and the run, from 1, that found it.
    Refuted {
        feed: Feed,
        run: u64,
    },
    NotFound {
        runs: u64,
    },
}

impl FuzzVerdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, FuzzVerdict::Refuted { .. })
    }
}

/// Runs the program on independent random feeds.
pub fn fuzz_refute(p: &Expr, seed: u64, runs: u64, step_budget: u64) -> FuzzVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = RunConfig::new(step_budget);
    for i in 1..=runs {
        let mut feed = Feed::random(rng.random());
        let Ok(r) = run(p, &mut feed, &cfg) else { continue };
        if r.outcome.is_error() {
            let witness = r.trace.feed();
            if matches!(replay(p, &witness, step_budget), Ok((Outcome::Error, _))) {
                return FuzzVerdict::Refuted { feed: witness, run: i };
            }
        }
    }
    FuzzVerdict::NotFound { runs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::{InstrumentConfig, Program};
    use crate::syntax::parse_core;

    fn instrumented(src: &str) -> Expr {
        Program::from_source(src, &InstrumentConfig::default()).unwrap().expr
    }

    #[test]
    fn a_single_pick_reaching_error_is_refuted() {
        let e = parse_core("if pick_b then ERROR else 1").unwrap();
        let EnumVerdict::Refuted(f) = exhaustive_refute(&e, &EnumBounds::default()) else {
            panic!("expected a refutation")
        };
        assert_eq!(
            f.iter().map(|(_, v)| *v).collect::<Vec<_>>(),
            vec![PickValue::Bool(true)]
        );
    }

    #[test]
    fn well_typed_bool_identity_is_exhausted() {
        let e = instrumented("let id (x : bool) : bool = x in id");
        let v = exhaustive_refute(&e, &EnumBounds::default());
        assert!(
            matches!(v, EnumVerdict::NoErrorWithinBounds { complete: true, .. }),
            "{v:?}"
        );
    }

    #[test]
    fn appl_int_is_refuted_when_the_range_covers_the_constant() {
        let e = instrumented(
            "let appl_int (fn : int -> int) : int = \
             let res = fn 1 in if res != 3 then fn 0 else (res - 1) < 0 in appl_int",
        );
        assert!(exhaustive_refute(&e, &EnumBounds::default()).is_refuted());
        let e = instrumented(
            "let appl_int (fn : int -> int) : int = \
             let res = fn 1 in if res != 32767 then fn 0 else (res - 1) < 0 in appl_int",
        );
        let near = EnumBounds {
            int_range: (32_760, 32_767),
            ..EnumBounds::default()
        };
        assert!(exhaustive_refute(&e, &near).is_refuted());
        assert!(!exhaustive_refute(&e, &EnumBounds::default()).is_refuted());
    }

    #[test]
    fn enumeration_orders_small_values_first() {
        let d = domain(PickKind::Int, (-2, 2));
        let ns: Vec<String> = d.iter().map(|v| v.to_string()).collect();
        assert_eq!(ns, ["0", "-1", "1", "-2", "2"]);
    }

    #[test]
    fn fuzzing_finds_shallow_errors_and_is_deterministic() {
        let e = instrumented("let id (x : bool) : bool = 1 in id");
        let a = fuzz_refute(&e, 3, 50, 10_000);
        assert!(a.is_refuted());
        let b = fuzz_refute(&e, 3, 50, 10_000);
        match (a, b) {
            (FuzzVerdict::Refuted { feed: fa, run: ra }, FuzzVerdict::Refuted { feed: fb, run: rb }) => {
                assert_eq!(ra, rb);
                assert_eq!(fa.to_text(), fb.to_text());
            }
            _ => unreachable!(),
        }
    }
}
