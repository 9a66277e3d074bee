use proptest::prelude::*;

use bjy::concolic::search_with;
use bjy::instrument::instrument;
use bjy::interp::{run, RunConfig};
use bjy::oracle::programs::small_program;
use bjy::solver::Solver;
use bjy::syntax::{alpha_eq, is_normal, normalize, parse, render};
use bjy::{replay, Feed, InstrumentConfig, Outcome, Program, SearchConfig};

fn outcome(e: &bjy::Expr, seed: u64) -> Outcome {
    run(e, &mut Feed::random(seed), &RunConfig::new(50_000))
        .expect("random feeds never miss")
        .outcome
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rendering_then_parsing_is_alpha_equivalent(seed in any::<u64>()) {
        let e = parse(&small_program(seed)).unwrap();
        let text = render(&e);
        let again = parse(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
        prop_assert!(alpha_eq(&e, &again), "{text}");
    }

    #[test]
    fn normalization_preserves_outcomes(seed in any::<u64>(), feed in any::<u64>()) {
        let (e, _, _) = instrument(&parse(&small_program(seed)).unwrap(), &InstrumentConfig::default()).unwrap();
        let n = normalize(&e);
        prop_assert!(is_normal(&n));
        let (a, b) = (outcome(&e, feed), outcome(&n, feed));
        prop_assert!(a.agrees_with(&b), "{} vs {}", a, b);
    }

    #[test]
    fn runs_are_deterministic_under_a_feed(seed in any::<u64>(), feed in any::<u64>()) {
        let p = Program::from_source(&small_program(seed), &InstrumentConfig::default()).unwrap();
        let r = run(&p.expr, &mut Feed::random(feed), &RunConfig::new(50_000)).unwrap();
        let (o, _) = replay(&p.expr, &r.trace.feed(), 50_000).unwrap();
        prop_assert!(o.agrees_with(&r.outcome));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reported_witnesses_replay_to_error(seed in any::<u64>()) {
        let p = Program::from_source(&small_program(seed), &InstrumentConfig::default()).unwrap();
        let mut solver = Solver::enumerator_only();
        let r = search_with(&p, &SearchConfig { seed, ..SearchConfig::default() }, &mut solver).unwrap();
        if let Some(refutation) = r.refutation() {
            let (o, _) = replay(&p.expr, &refutation.witness, 50_000).unwrap();
            prop_assert!(o.is_error());
        }
    }
}
