use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use riskweave::cart::best_split;
use riskweave::cycles::{fit, ivf_schema, FitConfig};
use riskweave::{chi_square_sf, predict, train, TrainParams};
use riskweave_bench::{chd_cohort, ivf_records};

fn chi_square(c: &mut Criterion) {
    c.bench_function("chi_square_sf grid 50x10", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for df in 1..=10 {
                for i in 1..=50 {
                    acc += chi_square_sf(black_box(f64::from(i)), df).unwrap();
                }
            }
            acc
        })
    });
}

fn cart(c: &mut Criterion) {
    let data = chd_cohort();
    c.bench_function("best_split 2279 rows", |b| {
        b.iter(|| best_split(black_box(&data.rows), &data.schema, &TrainParams::default()))
    });
    c.bench_function("train 2279 rows depth 4", |b| b.iter(|| train(black_box(&data), TrainParams::default()).unwrap()));
    let tree = train(&data, TrainParams::default()).unwrap();
    c.bench_function("predict", |b| b.iter(|| predict(&tree, black_box(&data.rows[7].values)).unwrap()));
}

fn cycles(c: &mut Criterion) {
    let records = ivf_records(5000);
    let schema = ivf_schema();
    let mut group = c.benchmark_group("cycles");
    group.sample_size(10);
    group.bench_function("fit 5000 records", |b| b.iter(|| fit(&schema, black_box(&records), FitConfig::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, chi_square, cart, cycles);
criterion_main!(benches);
