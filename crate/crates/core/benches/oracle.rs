use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lctrs_core::frontend::{load, Spec};
use lctrs_core::oracle::{build_graph, check_goal, enumerate_instances, Domain};
use lctrs_core::par::Exec;

fn spec(name: &str) -> Spec {
    let path = format!("{}/corpus/{name}.lctrs", env!("CARGO_MANIFEST_DIR"));
    load(&std::fs::read_to_string(path).expect("corpus file")).expect("corpus loads")
}

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn goal_checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("check_goal");
    group.sample_size(10);
    for (name, bound) in [("compositeness", 10), ("gcd_sub", 4)] {
        let s = spec(name);
        let (goals, _) = s.goal_set();
        let dom = Domain::new(bound);
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, name), &goals, |b, goals| {
                b.iter(|| {
                    for g in goals {
                        black_box(check_goal(&s.lctrs, g, &dom, 40, exec).expect("oracle runs"));
                    }
                })
            });
        }
    }
    group.finish();
}

fn graph_building(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_graph");
    group.sample_size(10);
    let s = spec("compositeness");
    let dom = Domain::new(12);
    let seeds = enumerate_instances(&s.lctrs, &s.cterm("init(n) /\\ true").expect("cterm"), &dom).expect("seeds");
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| {
            b.iter(|| black_box(build_graph(&s.lctrs, &seeds, &dom, 40, exec).expect("graph")))
        });
    }
    group.finish();
}

criterion_group!(benches, goal_checks, graph_building);
criterion_main!(benches);
