use super::*;
use crate::interp::{eval, run, Feed, Outcome, PickValue, RunConfig, Value};
use crate::syntax::parse_type;

fn cfg() -> InstrumentConfig {
    InstrumentConfig::default()
}

fn no_wrap() -> InstrumentConfig {
    InstrumentConfig {
        wrap_enabled: false,
        ..InstrumentConfig::default()
    }
}

fn program(src: &str, cfg: &InstrumentConfig) -> Program {
    Program::from_source(src, cfg).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn apply_field(ty: &str, field: &str, arg: Expr) -> Expr {
    let e = embed(&parse_type(ty).unwrap(), &cfg()).unwrap();
    normalize(&Expr::app(Expr::proj(e, field), arg))
}

fn outcomes(p: &Program, seeds: std::ops::Range<u64>) -> Vec<(Outcome, Trace)> {
    let mut cfg = RunConfig::new(50_000);
    cfg.watch = p.watch.clone();
    seeds
        .map(|s| {
            let r = run(&p.expr, &mut Feed::random_in(s, -4, 4), &cfg).unwrap();
            (r.outcome, r.trace)
        })
        .collect()
}

#[test]
fn int_checker_rejects_booleans() {
    let e = apply_field("int", "check", Expr::Bool(true));
    assert!(matches!(
        eval(&e, &mut Feed::zero(), 100).unwrap().0,
        Outcome::Value(Value::Bool(false))
    ));
    let e = apply_field("int", "check", Expr::Int(5));
    assert!(matches!(
        eval(&e, &mut Feed::zero(), 100).unwrap().0,
        Outcome::Value(Value::Bool(true))
    ));
}

#[test]
fn generated_function_can_reject_its_argument() {
    let gen = apply_field("int -> int", "gen", Expr::Int(0));
    let e = normalize(&Expr::app(gen, Expr::Bool(true)));
    let errs = (0..20)
        .filter(|s| eval(&e, &mut Feed::random(*s), 1000).unwrap().0.is_error())
        .count();
    assert!(errs > 0 && errs < 20, "{errs}");
}

#[test]
fn refinement_generator_discards_failures() {
    let e = apply_field("{int | fun a -> a > 0}", "gen", Expr::Int(0));
    let (_, trace) = eval(&e, &mut Feed::zero(), 1000).unwrap();
    let [(key, _)] = trace.picks.as_slice() else {
        panic!("one pick expected")
    };
    let with = |n| {
        let mut f = Feed::replay();
        f.insert(key.clone(), PickValue::Int(n));
        eval(&e, &mut f, 1000).unwrap().0
    };
    assert!(matches!(with(-3), Outcome::MZero));
    assert!(matches!(with(7), Outcome::Value(Value::Int(7))));
}

#[test]
fn id_bool_reports_its_actual_type() {
    let p = program("let id (x : bool) : bool = 1 in id", &cfg());
    let mut rc = RunConfig::new(10_000);
    rc.watch = p.watch.clone();
    let r = run(&p.expr, &mut Feed::zero(), &rc).unwrap();
    assert!(r.outcome.is_error());
    let d = p.attribute(&r.trace).expect("attributed");
    assert_eq!(&*d.name, "id");
    assert_eq!(d.expected, "(bool -> bool)");
    assert_eq!(d.actual(&r.trace), "(bool -> int)");
    assert_eq!(d.clause, "let id (x : bool) : bool = 1 in id");
}

#[test]
fn wrapper_checks_arguments_at_use_sites() {
    let src = "let f : (int -> int) = fun x -> 0 in f true";
    let wrapped = program(src, &cfg());
    assert!(outcomes(&wrapped, 0..20).iter().any(|(o, _)| o.is_error()));
    let bare = program(src, &no_wrap());
    assert!(outcomes(&bare, 0..20).iter().all(|(o, _)| !o.is_error()));

    // With wrapping off, the misuse still fails, but in the primitive rather
    // than at the declaration's interface.
    let src = "let f : (int -> int) = fun x -> x + 1 in f true";
    let bare = program(src, &no_wrap());
    for (o, t) in outcomes(&bare, 0..10) {
        assert!(o.is_error());
        assert!(bare.attribute(&t).is_none());
    }
    let wrapped = program(src, &cfg());
    assert!(outcomes(&wrapped, 0..20)
        .iter()
        .any(|(o, t)| o.is_error() && wrapped.attribute(t).is_some()));
}

#[test]
fn base_types_are_not_wrapped() {
    assert!(wrap_is_identity(&TypeExpr::Int));
    assert!(wrap_is_identity(&TypeExpr::Bool));
    let p = program("let (x : int) = 1 in x", &cfg());
    assert!(!p.dump().contains(".wrap"), "{}", p.dump());
}

#[test]
fn wrapped_records_hide_undeclared_labels() {
    let src = "let (r : {a : int}) = {a = 1; b = 2} in r.b";
    for (o, _) in outcomes(&program(src, &cfg()), 0..5) {
        assert!(o.is_error());
    }
    for (o, _) in outcomes(&program(src, &no_wrap()), 0..5) {
        assert!(matches!(o, Outcome::Value(Value::Int(2))));
    }
}

#[test]
fn polymorphism_is_parametric() {
    let ok = program("let f (x : 'a) : 'a = x in f", &cfg());
    assert!(outcomes(&ok, 0..10).iter().all(|(o, _)| !o.is_error()));
    let bad = program("let f (x : 'a) : 'a = 0 in f", &cfg());
    assert!(outcomes(&bad, 0..10).iter().all(|(o, _)| o.is_error()));
    let peek = program("let f (x : 'a) : int = x + 1 in f", &cfg());
    assert!(outcomes(&peek, 0..10).iter().all(|(o, _)| o.is_error()));
}

#[test]
fn explicit_type_parameters() {
    let ok = program("let f (type a) (x : a) : a = x in f", &cfg());
    assert!(outcomes(&ok, 0..10).iter().all(|(o, _)| !o.is_error()));
    let bad = program("let f (type a) (x : a) : a = 1 in f", &cfg());
    assert!(outcomes(&bad, 0..10).iter().all(|(o, _)| o.is_error()));
    let used = program("let f (type a) (x : a) : a = x in f int 3", &cfg());
    for (o, _) in outcomes(&used, 0..10) {
        assert!(matches!(o, Outcome::Value(Value::Int(3))), "{o}");
    }
}

#[test]
fn dependent_codomains_see_the_argument() {
    let ok = program("let f (x : int) : {int | fun r -> r > x} = x + 1 in f", &cfg());
    assert!(outcomes(&ok, 0..10).iter().all(|(o, _)| !o.is_error()));
    let bad = program("let f (x : int) : {int | fun r -> r > x} = x in f", &cfg());
    assert!(outcomes(&bad, 0..10).iter().all(|(o, _)| o.is_error()));
}

#[test]
fn variants_lists_and_recursive_types() {
    let ok = program(
        "let (v : (A of int || B of bool)) = B true in \
         let (l : list int) = [1; 2] in \
         let tree = Mu t. (Leaf || Node of {l : t; r : t}) in \
         let (x : tree) = Node {l = Leaf; r = Node {l = Leaf; r = Leaf}} in 0",
        &cfg(),
    );
    for (o, _) in outcomes(&ok, 0..10) {
        assert!(matches!(o, Outcome::Value(Value::Int(0))), "{o}");
    }
    for bad in [
        "let (v : (A of int || B of bool)) = B 1 in 0",
        "let (l : list int) = [1; true] in 0",
        "let tree = Mu t. (Leaf || Node of {l : t; r : t}) in let (x : tree) = Node {l = Leaf; r = 3} in 0",
    ] {
        let p = program(bad, &cfg());
        assert!(outcomes(&p, 0..5).iter().all(|(o, _)| o.is_error()), "{bad}");
    }
}

#[test]
fn intersections_dispatch_on_constructors() {
    let ok = program(
        "let f : ((A of int) -> int) && ((B of bool) -> bool) = \
         fun v -> match v with A n -> n + 1 | B b -> not b in f",
        &cfg(),
    );
    assert!(outcomes(&ok, 0..40).iter().all(|(o, _)| !o.is_error()));
    let bad = program(
        "let f : ((A of int) -> int) && ((B of bool) -> bool) = \
         fun v -> match v with A n -> n + 1 | B b -> 0 in f",
        &cfg(),
    );
    assert!(outcomes(&bad, 0..40).iter().any(|(o, _)| o.is_error()));
}

#[test]
fn ill_formed_types_are_rejected() {
    for src in [
        "let f : (int -> int) && (bool -> bool) = fun x -> x in f",
        "let (v : (A of int || A of bool)) = A 1 in v",
        "let f : ((A of int) -> int) && ((A of bool) -> int) = fun x -> 0 in f",
    ] {
        let err = Program::from_source(src, &cfg()).unwrap_err();
        assert!(
            matches!(err, PrepareError::Instrument(InstrumentError::IllFormedType { .. })),
            "{src}"
        );
    }
}

#[test]
fn unannotated_programs_are_unchanged_without_guards() {
    let cfg = InstrumentConfig {
        guard_primitives: false,
        ..InstrumentConfig::default()
    };
    let e = parse("let f x = x + 1 in f 2").unwrap();
    assert_eq!(instrument(&e, &cfg).unwrap().0, e);
}

#[test]
fn embeddings_occupy_contiguous_name_ranges() {
    let p = program(
        "let f (x : int) : int = x in let g (y : bool) : bool = y in g true",
        &cfg(),
    );
    assert_eq!(p.decls.len(), 2);
    let (a, b) = (&p.decls[0], &p.decls[1]);
    assert!(a.range.end <= b.range.start || b.range.end <= a.range.start);
    assert!(a.owns(&a.site) && !b.owns(&a.site));
}
