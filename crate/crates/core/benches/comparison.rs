use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use uuvnav::eval::run_comparison;
use uuvnav::experiments::Experiment;
use uuvnav::parallel::Execution;
use uuvnav::sim::ScenarioConfig;

fn comparison(c: &mut Criterion) {
    let base = ScenarioConfig {
        duration: 30.0,
        ..Default::default()
    };
    let configs = Experiment::T2.configs(&base);
    let seeds: Vec<u64> = (1..=8).collect();

    let mut group = c.benchmark_group("t2_30s_8_seeds");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_comparison(&configs, &seeds, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, comparison);
criterion_main!(benches);
