use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smoothlab_core::constants::{c_pm, c_pm_averaged};
use smoothlab_core::disorder::DisorderSpec;
use smoothlab_core::pinning::{
    free_energy_mc, homogeneous_free_energy, quenched_log_z, RenewalLaw,
};

fn bench_quenched_recursion(c: &mut Criterion) {
    let renewal = RenewalLaw::new(0.8).unwrap();
    let spec = DisorderSpec::standard_gaussian();
    let mut group = c.benchmark_group("quenched_log_z");
    for n in [512usize, 2048, 4096] {
        let (omega, _) = spec.sample_block(0.1, n, 42).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &omega, |b, omega| {
            b.iter(|| quenched_log_z(&renewal, omega, 0.5, -0.1).unwrap())
        });
    }
    group.finish();
}

fn bench_free_energy_mc(c: &mut Criterion) {
    let renewal = RenewalLaw::new(0.8).unwrap();
    let spec = DisorderSpec::standard_gaussian();
    c.bench_function("free_energy_mc_512x16", |b| {
        b.iter(|| free_energy_mc(&spec, &renewal, 0.5, -0.1, 0.2, 512, 16, 42, 4).unwrap())
    });
}

fn bench_constants(c: &mut Criterion) {
    let gauss = DisorderSpec::standard_gaussian();
    let tp = DisorderSpec::two_point(2.0).unwrap();
    c.bench_function("c_pm_gaussian", |b| {
        b.iter(|| c_pm(&gauss, 0.2, 0.1, 1.0).unwrap())
    });
    c.bench_function("c_pm_averaged_two_point", |b| {
        b.iter(|| c_pm_averaged(&tp, 0.2, 0.1, 1.0).unwrap())
    });
}

fn bench_homogeneous(c: &mut Criterion) {
    let renewal = RenewalLaw::new(0.75).unwrap();
    // Warm the power table outside the measurement.
    homogeneous_free_energy(&renewal, 1e-4);
    c.bench_function("homogeneous_f_small_h", |b| {
        b.iter(|| homogeneous_free_energy(&renewal, 1e-3))
    });
}

criterion_group!(
    benches,
    bench_quenched_recursion,
    bench_free_energy_mc,
    bench_constants,
    bench_homogeneous
);
criterion_main!(benches);
