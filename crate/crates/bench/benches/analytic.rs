use criterion::{criterion_group, criterion_main, Criterion};
use qrenew_core::analytic::{delayed_wavenumbers, excess_entropy, uniform_cq};
use qrenew_core::RenewalProcess;

fn roots(c: &mut Criterion) {
    c.bench_function("delayed_wavenumbers/1e3", |b| b.iter(|| delayed_wavenumbers(1.0, 1.0, 1000).unwrap()));
}

fn series(c: &mut Criterion) {
    c.bench_function("uniform_cq/1e5", |b| b.iter(|| uniform_cq(100_000).unwrap()));
}

fn quadrature(c: &mut Criterion) {
    let p = RenewalProcess::delayed_poisson(1.0, 1.0).unwrap();
    c.bench_function("excess_entropy/delayed", |b| b.iter(|| excess_entropy(&p).unwrap()));
}

criterion_group!(benches, roots, series, quadrature);
criterion_main!(benches);
