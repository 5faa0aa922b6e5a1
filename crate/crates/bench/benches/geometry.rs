use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mono3d::geometry::{iou_3d, iou_3d_oracle, iou_bev};
use mono3d_bench::box_pairs;

fn iou(c: &mut Criterion) {
    let pairs = box_pairs(250);
    let mut group = c.benchmark_group("iou");
    group.bench_function("bev_1000_pairs", |b| {
        b.iter(|| pairs.iter().map(|(g, p)| iou_bev(black_box(g), black_box(p))).sum::<f64>())
    });
    group.bench_function("3d_1000_pairs", |b| {
        b.iter(|| pairs.iter().map(|(g, p)| iou_3d(black_box(g), black_box(p))).sum::<f64>())
    });
    group.sample_size(10);
    group.bench_function("grid_oracle_10_pairs_res_400", |b| {
        b.iter(|| pairs[..10].iter().map(|(g, p)| iou_3d_oracle(g, p, 400)).sum::<f64>())
    });
    group.finish();
}

criterion_group!(benches, iou);
criterion_main!(benches);
