use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mono3d::diagnosis::{run_substitution_table, substitution_config, SubstituteOptions};
use mono3d::evaluation::{ap40, rangewise_eval, Difficulty, EvalConfig, Task};
use mono3d::kitti_io::Category;
use mono3d_bench::{eval_frames, scene};

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("ap40");
    for images in [100, 1000] {
        let frames = eval_frames(images);
        for task in [Task::Detect2D, Task::Detect3D] {
            let config = EvalConfig::new(task, Category::Car, Difficulty::Moderate);
            group.bench_with_input(BenchmarkId::new(task.as_str(), images), &frames, |b, f| {
                b.iter(|| ap40(black_box(f), &config).unwrap().ap40)
            });
        }
    }
    group.finish();

    let frames = eval_frames(500);
    let config = EvalConfig::new(Task::Detect3D, Category::Car, Difficulty::Moderate);
    c.bench_function("rangewise_500_images", |b| {
        b.iter(|| rangewise_eval(black_box(&frames), &config, 10.0).unwrap().len())
    });

    let diag = scene(200);
    let mut group = c.benchmark_group("diagnosis");
    group.sample_size(10);
    group.bench_function("substitution_table_200_images", |b| {
        b.iter(|| run_substitution_table(black_box(&diag), &substitution_config(), &SubstituteOptions::default()).unwrap().baseline_ap)
    });
    group.finish();
}

criterion_group!(benches, evaluation);
criterion_main!(benches);
