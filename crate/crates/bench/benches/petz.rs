use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gauss_petz::fock::gaussian_density;
use gauss_petz::{
    fidelity_recovery_bound, petz_channel, recovery_deficit, williamson, QuadratureConfig,
};
use gauss_petz_bench::instance;

fn closed_forms(c: &mut Criterion) {
    for modes in [1, 2] {
        let inst = instance(modes);
        c.bench_with_input(BenchmarkId::new("williamson", modes), &inst, |b, i| {
            b.iter(|| williamson(black_box(i.sigma.cov())).unwrap())
        });
        c.bench_with_input(BenchmarkId::new("petz_channel", modes), &inst, |b, i| {
            b.iter(|| petz_channel(black_box(&i.sigma), black_box(&i.channel)).unwrap())
        });
        c.bench_with_input(
            BenchmarkId::new("recovery_deficit", modes),
            &inst,
            |b, i| b.iter(|| recovery_deficit(&i.rho, &i.sigma, &i.channel).unwrap()),
        );
    }
    let inst = instance(1);
    let quad = QuadratureConfig::default();
    c.bench_function("fidelity_recovery_bound/1", |b| {
        b.iter(|| fidelity_recovery_bound(&inst.rho, &inst.sigma, &inst.channel, &quad).unwrap())
    });
}

fn dense(c: &mut Criterion) {
    let inst = instance(1);
    c.bench_function("gaussian_density/cutoff20", |b| {
        b.iter(|| gaussian_density(&inst.sigma, 20).unwrap())
    });
}

criterion_group!(benches, closed_forms, dense);
criterion_main!(benches);
