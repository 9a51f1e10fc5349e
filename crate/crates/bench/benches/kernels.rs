use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gbc_bench::{clifford_pair, dirac, sde, skew};
use gbc_core::cliff::{pfaffian, pfaffian_berezin};
use gbc_core::sde::{advance, path_increments, PathState};
use gbc_core::C64;

fn clifford(c: &mut Criterion) {
    let mut g = c.benchmark_group("clifford_mul");
    for d in [2, 4, 6] {
        let (a, b) = clifford_pair(d);
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |bench, _| {
            bench.iter(|| black_box(&a).clifford_mul(black_box(&b)).unwrap())
        });
    }
    g.finish();
}

fn pfaffians(c: &mut Criterion) {
    let mut g = c.benchmark_group("pfaffian");
    for d in [4, 6, 8] {
        let a = skew(d);
        g.bench_with_input(BenchmarkId::new("elimination", d), &d, |bench, _| {
            bench.iter(|| pfaffian(black_box(&a)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("berezin", d), &d, |bench, _| {
            bench.iter(|| pfaffian_berezin(black_box(&a)).unwrap())
        });
    }
    g.finish();
}

fn dirac_apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("dirac_apply");
    for n in [32, 64] {
        let (op, f) = dirac("torsion-torus", n);
        let mut out = vec![C64::default(); op.len()];
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| op.apply_dirac(black_box(&f), &mut out))
        });
    }
    g.finish();
}

fn heun_path(c: &mut Criterion) {
    let spec = sde("torsion-torus");
    let steps = 32;
    let h = 0.1 / steps as f64;
    let dw = path_increments(1, 0, steps, 2, h);
    let fib = spec.rep().size();
    c.bench_function("heun_path_32_steps", |bench| {
        bench.iter(|| {
            let mut s = PathState::start(&[0.4, 1.3], fib, true);
            advance(&spec, &mut s, black_box(&dw), h, 1.0).unwrap();
            s
        })
    });
}

criterion_group!(benches, clifford, pfaffians, dirac_apply, heun_path);
criterion_main!(benches);
