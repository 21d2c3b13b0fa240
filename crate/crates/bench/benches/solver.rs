use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ctp_bench::{ctpdep_small, harness, toy};
use ctp_core::policy::{evaluate_exact, reference_policy};
use ctp_core::reductions::compute_certificate;
use ctp_core::solve::{solve_dependent, solve_independent};

fn solvers(c: &mut Criterion) {
    let h = harness();
    c.bench_function("solve baiting harness L=2", |b| {
        b.iter(|| solve_independent(black_box(&h)).unwrap())
    });
    let dep = ctpdep_small();
    c.bench_function("solve ctpdep n=2", |b| {
        b.iter(|| solve_dependent(black_box(&dep)).unwrap())
    });
    let t = toy(3);
    c.bench_function("solve random toy", |b| {
        b.iter(|| solve_independent(black_box(&t)).unwrap())
    });
}

fn evaluation(c: &mut Criterion) {
    let h = harness();
    let pi = reference_policy("baiting_pi", &[]).unwrap();
    c.bench_function("evaluate baiting_pi", |b| {
        b.iter(|| evaluate_exact(black_box(&h), &pi).unwrap())
    });
    c.bench_function("certificate (2,1)", |b| {
        b.iter(|| compute_certificate(black_box(2), black_box(1)).unwrap())
    });
}

criterion_group!(benches, solvers, evaluation);
criterion_main!(benches);
