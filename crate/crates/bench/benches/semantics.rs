use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use psi_bench::fixtures;
use psi_core::{concrete_bisim, late_transitions, symbolic_bisim, symbolic_transitions, FreshSession, Nominal};

fn transitions(c: &mut Criterion) {
    let mut group = c.benchmark_group("transitions");
    for f in fixtures() {
        let unit = f.inst.unit();
        group.bench_with_input(BenchmarkId::new("late", f.name), &f, |b, f| {
            b.iter(|| late_transitions(&*f.inst, &unit, &f.p, &f.dom).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("symbolic", f.name), &f, |b, f| {
            b.iter(|| {
                let mut session = FreshSession::new(unit.support());
                symbolic_transitions(&*f.inst, &unit, &f.p, &mut session, f.dom.rep_bound).unwrap()
            })
        });
    }
    group.finish();
}

fn bisimulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("bisim");
    group.sample_size(20);
    for f in fixtures() {
        let unit = f.inst.unit();
        group.bench_with_input(BenchmarkId::new("concrete", f.name), &f, |b, f| {
            b.iter(|| concrete_bisim(&*f.inst, &unit, &f.p, &f.q, &f.dom).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("symbolic", f.name), &f, |b, f| {
            b.iter(|| symbolic_bisim(&*f.inst, &f.p, &f.q, &f.dom).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transitions, bisimulation);
criterion_main!(benches);
