//! Rayon pool against a single worker on the two hot loops.
//!
//! `cargo bench --no-default-features` measures the fully sequential build.

use criterion::{criterion_group, criterion_main, Criterion};
use databudget::curves::{pilot_curve, CurveConfig};
use databudget::learners::{train_forest, ForestParams};
use databudget::tabular::{draw_pilot, generate_synthetic, subsample_and_split, SyntheticSpec};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("1-thread", one), ("rayon", all)]
}

fn bench(c: &mut Criterion) {
    let spec = SyntheticSpec {
        n: 3000,
        d: 8,
        classes: 3,
        separation: 2.0,
        label_noise: 0.0,
    };
    let ds = generate_synthetic("bench", &spec, 1).unwrap();
    let split = subsample_and_split(&ds, 3000, 500, 2).unwrap();
    let pilot = draw_pilot(&split, 100, 3).unwrap();
    let cfg = CurveConfig {
        repetitions: 20,
        grid: (10..=90).step_by(10).collect(),
        seed: 4,
        forest: ForestParams::default().with_trees(20),
    };
    let forest = ForestParams::default().with_trees(50).with_seed(5);

    let mut curve = c.benchmark_group("pilot_curve");
    curve.sample_size(10);
    for (name, pool) in pools() {
        curve.bench_function(name, |b| {
            b.iter(|| pool.install(|| pilot_curve(&pilot, &cfg).unwrap()))
        });
    }
    curve.finish();

    let mut fit = c.benchmark_group("forest_fit");
    fit.sample_size(10);
    for (name, pool) in pools() {
        fit.bench_function(name, |b| {
            b.iter(|| {
                pool.install(|| {
                    train_forest(split.train.rows.view(), &split.train.labels, &forest).unwrap()
                })
            })
        });
    }
    fit.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
