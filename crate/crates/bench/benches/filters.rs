use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use evfilt_bench::{noise_stream, scene_stream};
use evfilt_core::hw::{hw_filter_stream, pipeline_simulate};
use evfilt_core::{filter_stream, nnb_filter, stcf_filter, Algorithm, FilterConfig, HwParams, PipelineConfig};

fn filters(c: &mut Criterion) {
    let cfg = FilterConfig::default();
    let hw = HwParams::default();
    for (name, stream) in [("scene", scene_stream()), ("noise", noise_stream(200_000, 3))] {
        let mut g = c.benchmark_group(format!("filters/{name}"));
        g.throughput(Throughput::Elements(stream.len() as u64));
        g.sample_size(20);
        g.bench_function("dif", |b| b.iter(|| filter_stream(&stream, &cfg, Algorithm::Dif).unwrap()));
        g.bench_function("bif", |b| b.iter(|| filter_stream(&stream, &cfg, Algorithm::Bif).unwrap()));
        g.bench_function("dif-hw", |b| b.iter(|| hw_filter_stream(&stream, &cfg, &hw).unwrap()));
        g.bench_function("pipeline", |b| {
            b.iter_batched(
                || PipelineConfig::new(312.70e6),
                |pipe| pipeline_simulate(&stream, &cfg, &hw, &pipe).unwrap(),
                BatchSize::SmallInput,
            )
        });
        g.bench_function("nnb", |b| b.iter(|| nnb_filter(&stream, 200).unwrap()));
        g.bench_function("stcf2", |b| b.iter(|| stcf_filter(&stream, 2, 200).unwrap()));
        g.finish();
    }
}

criterion_group!(benches, filters);
criterion_main!(benches);
