use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use lagdmc_bench::oscillator_records;
use lagdmc_core::models::HarmonicOscillator;
use lagdmc_core::{Observable, RngStream, Trajectory};

fn dmc_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("dmc_steps");
    let model = HarmonicOscillator::default();
    let steps = 1000;
    for walkers in [10usize, 100, 1000] {
        group.throughput(Throughput::Elements((walkers * steps) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(walkers), &walkers, |b, &walkers| {
            let obs = [Observable::Potential];
            b.iter(|| {
                let mut t = Trajectory::new(&model, walkers, RngStream::trajectory(9, 0), &obs).unwrap();
                t.run(steps, |_| Ok(())).unwrap();
            });
        });
    }
    group.finish();
}

fn benchmark_replication(c: &mut Criterion) {
    let mut group = c.benchmark_group("benchmark_replication");
    group.sample_size(10);
    group.bench_function("N10_n50050", |b| b.iter(|| oscillator_records(10, 50_050, 3)));
    group.finish();
}

criterion_group!(benches, dmc_steps, benchmark_replication);
criterion_main!(benches);
