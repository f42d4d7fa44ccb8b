use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qcurv_core::kernels::{kernel_table, KernelKind};
use qcurv_core::{angular_log_avg, angular_pow_avg, offcenter_radial_avg};

fn averages(c: &mut Criterion) {
    let mut g = c.benchmark_group("angular");
    g.bench_function("log n=4 near diagonal", |b| b.iter(|| angular_log_avg(4, black_box(1.0), black_box(1.001))));
    g.bench_function("log n=6 far", |b| b.iter(|| angular_log_avg(6, black_box(0.2), black_box(7.0))));
    g.bench_function("pow k=4 n=6", |b| b.iter(|| angular_pow_avg(6, black_box(1.3), black_box(0.9), 4.0)));
    g.bench_function("offcenter field", |b| {
        b.iter(|| offcenter_radial_avg(4, |d| Ok((1.0 + d * d).ln()), black_box(2.0), black_box(500.0)))
    });
    g.finish();
}

fn tables(c: &mut Criterion) {
    let radii: Vec<f64> = (0..24).map(|i| 0.1 * 1.25f64.powi(i)).collect();
    c.bench_function("kernel table 24x24 (cached)", |b| b.iter(|| kernel_table(4, KernelKind::Log, black_box(&radii))));
}

criterion_group!(benches, averages, tables);
criterion_main!(benches);
