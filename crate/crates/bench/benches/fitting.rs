use criterion::{black_box, criterion_group, criterion_main, Criterion};
use progx::engine::{fit, EngineConfig};
use progx::ingest::{blur_kernel_to_points, render_segment_kernel};
use progx::sampling::SamplerKind;
use progx::ModelType;
use progx_bench::{five_lines, homography_scene};

fn five_line_benchmark(c: &mut Criterion) {
    let scene = five_lines(0);
    let mut group = c.benchmark_group("five_lines");
    for sampler in [SamplerKind::ConnectedComponents, SamplerKind::Prosac, SamplerKind::PNapsac] {
        let cfg = EngineConfig { sampler, ..EngineConfig::default() };
        group.bench_function(sampler.name(), |b| b.iter(|| fit(black_box(&scene.points), ModelType::Line2D, &cfg).unwrap()));
    }
    group.finish();
}

fn homographies(c: &mut Criterion) {
    let scene = homography_scene(3, 1);
    let cfg = EngineConfig::default();
    c.bench_function("three_homographies", |b| {
        b.iter(|| fit(black_box(&scene.points), ModelType::Homography, &cfg).unwrap())
    });
}

fn blur_kernel(c: &mut Criterion) {
    let kernel = render_segment_kernel(64, 3, 0.1, 2);
    let cfg = EngineConfig { epsilon: 1.5, ..EngineConfig::default() };
    c.bench_function("blur_kernel_segments", |b| {
        b.iter(|| {
            let points = blur_kernel_to_points(black_box(&kernel.image), 0.1);
            fit(&points, ModelType::LineSegment2D, &cfg).unwrap()
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = five_line_benchmark, homographies, blur_kernel
}
criterion_main!(benches);
