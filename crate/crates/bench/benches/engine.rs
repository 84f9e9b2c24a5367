use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nclaurent::divcheck::{check_steps, DivisionLimits};
use nclaurent::pitoracle::{verify_iterate, PitConfig};
use nclaurent::Side;
use nclaurent_bench::{engine, ITERATE_CASES};

fn iterate(c: &mut Criterion) {
    let mut g = c.benchmark_group("iterate");
    g.sample_size(10);
    for &(h, k) in ITERATE_CASES {
        g.bench_with_input(BenchmarkId::new(h, k), &(h, k), |b, &(h, k)| {
            // A fresh engine each time so the orbit cache does not hide the work.
            b.iter(|| engine(h).iterate(k, Side::X).unwrap().stats.term_count)
        });
    }
    g.finish();
}

fn division(c: &mut Criterion) {
    let e = engine("1,0,1");
    e.pair(5).unwrap();
    c.bench_function("division/1,0,1/k=1..5", |b| {
        b.iter(|| check_steps(&e, 1..=5, &DivisionLimits::default()).unwrap().len())
    });
}

fn pit(c: &mut Criterion) {
    let e = engine("1,0,1");
    let cfg = PitConfig { seed: 7, ..PitConfig::default() };
    e.pair(4).unwrap();
    c.bench_function("pit/1,0,1/k=4", |b| b.iter(|| verify_iterate(&e, 4, Side::X, &cfg).unwrap().checks));
}

criterion_group!(benches, iterate, division, pit);
criterion_main!(benches);
