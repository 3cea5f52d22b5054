use std::hint::black_box;

use boxguard::{build_monitor, gen_samples, MixtureComponent, MonitorConfig, SyntheticDistribution};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn mixture(dim: usize) -> SyntheticDistribution {
    let component = |label: &str, shift: f64| MixtureComponent {
        label: label.into(),
        weight: 0.5,
        mean: (0..dim).map(|i| if i == 0 { shift } else { 0.0 }).collect(),
        std: vec![1.0; dim],
    };
    SyntheticDistribution {
        components: vec![component("a", 0.0), component("b", 6.0)],
        label_noise: [("a".to_string(), 0.05), ("b".to_string(), 0.05)].into_iter().collect(),
    }
}

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_monitor");
    for n in [1_000usize, 10_000] {
        let samples = gen_samples(&mixture(8), 1, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &samples, |b, s| {
            b.iter(|| build_monitor(black_box(s), &MonitorConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn query(c: &mut Criterion) {
    let train = gen_samples(&mixture(8), 1, 10_000).unwrap();
    let monitor = build_monitor(&train, &MonitorConfig::default()).unwrap();
    let probes = gen_samples(&mixture(8), 2, 1_000).unwrap();
    c.bench_function("query_1000", |b| {
        b.iter(|| {
            probes
                .iter()
                .filter(|p| monitor.query(&p.features, &p.predicted).is_ok())
                .count()
        })
    });
}

criterion_group!(benches, build, query);
criterion_main!(benches);
