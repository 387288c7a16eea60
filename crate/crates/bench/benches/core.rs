use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pmseq_bench::{equilateral, planted, staircase};
use pmseq_core::density::{classify_null, exact_density, LambdaSeq, SetDescription};
use pmseq_core::distfn::{eps0, levy_distance, DEFAULT_TOL};
use pmseq_core::harness::{run_suite, SuiteConfig};
use pmseq_core::{Analyzer, TNorm, TriangleFn};

fn levy(c: &mut Criterion) {
    let mut g = c.benchmark_group("levy_distance");
    for k in [1usize, 4, 16] {
        let (f, h) = (staircase(k, 0), staircase(k, 1));
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            b.iter(|| levy_distance(black_box(&f), black_box(&h), DEFAULT_TOL).unwrap())
        });
    }
    g.finish();
    let f = staircase(4, 0);
    c.bench_function("levy_distance_to_eps0", |b| b.iter(|| levy_distance(black_box(&f), &eps0(), DEFAULT_TOL).unwrap()));
}

fn tau(c: &mut Criterion) {
    let (f, h) = (staircase(8, 0), staircase(8, 2));
    for t in TNorm::ALL {
        let tau = TriangleFn::new(t);
        c.bench_function(&format!("tau_{t}"), |b| b.iter(|| tau.apply(black_box(&f), black_box(&h)).unwrap()));
    }
    let space = equilateral(8);
    c.bench_function("verify_axioms_8", |b| b.iter(|| space.verify_axioms().unwrap()));
}

fn density(c: &mut Criterion) {
    let set = SetDescription::union(vec![
        SetDescription::ap(3, 7).unwrap(),
        SetDescription::Squares,
        SetDescription::finite([5u64, 90, 1234]).unwrap(),
    ]);
    c.bench_function("exact_density_periodic", |b| b.iter(|| exact_density(black_box(&set), &LambdaSeq::Half, 1_000_000)));
    let windows = SetDescription::windows(LambdaSeq::CeilSqrt, 4, 1).unwrap();
    let mut g = c.benchmark_group("classify_null_windows");
    g.sample_size(10);
    for h in [100_000u64, 1_000_000] {
        g.bench_with_input(BenchmarkId::from_parameter(h), &h, |b, &h| {
            b.iter(|| classify_null(&windows, &LambdaSeq::Identity, h, 0.02).unwrap())
        });
    }
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let seq = planted(4, SetDescription::windows(LambdaSeq::CeilSqrt, 8, 1).unwrap());
    let mut g = c.benchmark_group("analysis");
    g.sample_size(10);
    g.bench_function("check_convergence_1e6", |b| {
        b.iter(|| Analyzer::new(&seq, &LambdaSeq::Identity, 1_000_000, 0.02).unwrap().check_convergence("p0").unwrap())
    });
    g.bench_function("point_sets_1e6", |b| {
        b.iter(|| Analyzer::new(&seq, &LambdaSeq::Half, 1_000_000, 0.02).unwrap().point_sets().unwrap())
    });
    let squares = planted(3, SetDescription::Squares);
    g.bench_function("extract_g_1e6", |b| {
        b.iter(|| {
            Analyzer::new(&squares, &LambdaSeq::Identity, 1_000_000, 0.02)
                .unwrap()
                .extract_full_density_subsequence("p0")
                .unwrap()
        })
    });
    let cfg = SuiteConfig {
        properties: vec!["all".into()],
        instances: 2,
        overrides: Default::default(),
        horizon: 100_000,
        ..SuiteConfig::default()
    };
    g.bench_function("suite_2_instances_1e5", |b| b.iter(|| run_suite(&cfg, None).unwrap()));
    g.finish();
}

criterion_group!(benches, levy, tau, density, analysis);
criterion_main!(benches);
