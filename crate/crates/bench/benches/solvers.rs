use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tulp::bnb::{solve_bnb, BnbOptions};
use tulp::harness::{gen_kmedoid_instance, gen_transport_instance};
use tulp::lp::{solve_simplex, Engine, PivotRule, SolverOptions};
use tulp::models::{build_expendable, build_kmedoid, build_kmedoid_reduced_matrix};
use tulp::tu::{is_tu_exhaustive, is_tu_ghouila_houri, GhMode};

fn kmedoid(c: &mut Criterion) {
    let mut group = c.benchmark_group("kmedoid");
    group.sample_size(10);
    let opts = SolverOptions::default().with_pivot_rule(PivotRule::Dantzig);
    for n in [20, 40, 80] {
        let lp = build_kmedoid(&gen_kmedoid_instance(n, 5, 42)).unwrap();
        group.bench_with_input(BenchmarkId::new("lp", n), &lp, |b, lp| b.iter(|| solve_simplex(black_box(lp), &opts).unwrap()));
        let vars: Vec<usize> = (0..lp.num_vars()).collect();
        let bnb = BnbOptions { lp: opts.clone(), ..BnbOptions::default() };
        group.bench_with_input(BenchmarkId::new("bnb", n), &lp, |b, lp| {
            b.iter(|| solve_bnb(black_box(lp), &vars, &bnb).unwrap())
        });
    }
    group.finish();
}

fn engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("engines");
    let lp = build_expendable(&gen_transport_instance(8, 8, 3, 20)).unwrap();
    for engine in [Engine::Tableau, Engine::Revised, Engine::Dual] {
        let opts = SolverOptions::default().with_engine(engine);
        group.bench_function(format!("{engine:?}"), |b| b.iter(|| solve_simplex(black_box(&lp), &opts).unwrap()));
    }
    group.finish();
}

fn tu_checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("tu");
    group.sample_size(10);
    let m = build_kmedoid_reduced_matrix(3);
    group.bench_function("exhaustive_kmedoid_3", |b| b.iter(|| is_tu_exhaustive(black_box(&m)).unwrap()));
    group.bench_function("ghouila_houri_kmedoid_3", |b| {
        b.iter(|| is_tu_ghouila_houri(black_box(&m), GhMode::AllSubsets).unwrap())
    });
    let m4 = build_kmedoid_reduced_matrix(4);
    group.bench_function("sampled_kmedoid_4", |b| {
        b.iter(|| is_tu_ghouila_houri(black_box(&m4), GhMode::Sampled { seed: 1, trials: 1000 }).unwrap())
    });
    group.finish();
}

criterion_group!(benches, kmedoid, engines, tu_checks);
criterion_main!(benches);
