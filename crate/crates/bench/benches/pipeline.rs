use std::hint::black_box;

use bjy::concolic::search_with;
use bjy::solver::{SmtSolver, Solver};
use bjy::{exhaustive_refute, fuzz_refute, parse, EnumBounds, InstrumentConfig, Program, SearchConfig, SolverChoice};
use bjy_bench::entries;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const PROGRAMS: &[&str] = &[
    "appl_int",
    "id_bool",
    "prepend",
    "mk_student",
    "bad_tree",
    "transform_record",
];

fn translate(c: &mut Criterion) {
    let mut g = c.benchmark_group("translate");
    for e in entries(PROGRAMS) {
        g.bench_with_input(BenchmarkId::new("parse", &e.name), &e.source, |b, src| {
            b.iter(|| parse(black_box(src)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("instrument", &e.name), &e.source, |b, src| {
            b.iter(|| Program::from_source(black_box(src), &InstrumentConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn concolic(c: &mut Criterion) {
    let mut g = c.benchmark_group("concolic");
    g.sample_size(20);
    let cfg = SearchConfig::default();
    for choice in [SolverChoice::Hybrid, SolverChoice::Enumerator] {
        let mut solver = Solver::new(choice, SmtSolver::discover()).unwrap();
        for e in entries(PROGRAMS) {
            let p = Program::from_source(&e.source, &InstrumentConfig::default()).unwrap();
            let id = BenchmarkId::new(format!("{choice:?}").to_lowercase(), &e.name);
            g.bench_function(id, |b| b.iter(|| search_with(&p, &cfg, &mut solver).unwrap()));
        }
    }
    g.finish();
}

fn oracles(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracles");
    g.sample_size(10);
    for e in entries(&["id_bool", "appl_int"]) {
        let p = Program::from_source(&e.source, &InstrumentConfig::default()).unwrap();
        g.bench_function(BenchmarkId::new("exhaustive", &e.name), |b| {
            b.iter(|| exhaustive_refute(&p.expr, &EnumBounds::default()))
        });
        g.bench_function(BenchmarkId::new("fuzz_1000", &e.name), |b| {
            b.iter(|| fuzz_refute(&p.expr, 0, 1000, 50_000))
        });
    }
    g.finish();
}

criterion_group!(benches, translate, concolic, oracles);
criterion_main!(benches);
