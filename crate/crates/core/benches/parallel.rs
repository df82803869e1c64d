use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use loewner::backward::{trace_curve, DEFAULT_LADDER, DEFAULT_TOL};
use loewner::driver::Driver;
use loewner::exec::Exec;
use loewner::raster::{hull_raster, Grid, RasterOptions, Window};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn driver() -> Driver {
    Driver::sqrt(Complex64::new(0.2, 0.2))
}

fn bench_hull_raster(c: &mut Criterion) {
    let d = driver();
    let grid = Grid::new(Window::square(3.0), 64, 64).unwrap();
    let mut group = c.benchmark_group("hull_raster_64");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| hull_raster(&d, 1.0, grid, &RasterOptions::with_exec(exec)).unwrap())
        });
    }
    group.finish();
}

fn bench_trace_curve(c: &mut Criterion) {
    let d = driver();
    let mut group = c.benchmark_group("trace_curve_64");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| trace_curve(&d, 64, &DEFAULT_LADDER, DEFAULT_TOL, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_hull_raster, bench_trace_curve);
criterion_main!(benches);
