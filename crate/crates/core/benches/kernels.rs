use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use subsum_core::make_group;
use subsum_core::par::ExecMode;
use subsum_core::structure::{critical_number, max_non_nice_incomplete_set, SearchConfig};
use subsum_core::sumset::subset_sums_of_set;
use subsum_core::theory::{verify_olson_growth, verify_zero_sum};

const MODES: [(&str, ExecMode); 2] = [
    ("parallel", ExecMode::Parallel),
    ("sequential", ExecMode::Sequential),
];

fn searches(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    for factors in [&[24][..], &[2, 2, 2, 3], &[30]] {
        let g = make_group(factors).unwrap();
        for (name, mode) in MODES {
            let cfg = SearchConfig {
                mode,
                ..SearchConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(format!("critical/{name}"), &g), &g, |b, g| {
                b.iter(|| critical_number(black_box(g), &cfg))
            });
        }
    }
    let g = make_group(&[4, 5]).unwrap();
    for (name, mode) in MODES {
        let cfg = SearchConfig {
            mode,
            ..SearchConfig::default()
        };
        group.bench_function(format!("max-non-nice/{name}/Z4xZ5"), |b| {
            b.iter(|| max_non_nice_incomplete_set(black_box(&g), 1.0 / 6.0, &cfg).unwrap())
        });
    }
    group.finish();
}

fn verifiers(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    let g = make_group(&[2, 8]).unwrap();
    for (name, mode) in MODES {
        group.bench_function(format!("zero-sum/{name}/Z2xZ8"), |b| {
            b.iter(|| verify_zero_sum(black_box(&g), mode).unwrap())
        });
        group.bench_function(format!("olson/{name}/Z2xZ8"), |b| {
            b.iter(|| verify_olson_growth(black_box(&g), 4, mode).unwrap())
        });
    }
    group.finish();
}

fn closure(c: &mut Criterion) {
    let g = make_group(&[1009]).unwrap();
    let a = g.set_of(&(1..40).map(|i| i * i % 1009).collect::<Vec<_>>()).unwrap();
    c.bench_function("subset_sums/Z1009/|A|=39", |b| {
        b.iter(|| subset_sums_of_set(black_box(&g), black_box(&a)))
    });
}

criterion_group!(benches, searches, verifiers, closure);
criterion_main!(benches);
