use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use xpcc_bench::shell_sequence;
use xpcc_core::metrics::geometry_psnr_d1;
use xpcc_core::pipeline::{analyze_frame, decode_clouds, encode_clouds};
use xpcc_core::synth::{self, StackSpec};
use xpcc_core::{segment, CodecParams, PipelineConfig};

fn segmentation(c: &mut Criterion) {
    let cloud = synth::stacked_cylinders(&StackSpec::default());
    let cfg = PipelineConfig::default();
    let mut g = c.benchmark_group("segment");
    g.throughput(Throughput::Elements(cloud.len() as u64));
    g.bench_function("stacked_auto", |b| b.iter(|| segment(black_box(&cloud), &cfg.segmentation).unwrap()));
    g.bench_function("analyze_frame", |b| b.iter(|| analyze_frame(black_box(&cloud), &cfg).unwrap()));
    g.finish();
}

fn codec(c: &mut Criterion) {
    let seq = shell_sequence(8);
    let points: u64 = seq.iter().map(|f| f.len() as u64).sum();
    let mut g = c.benchmark_group("codec");
    g.throughput(Throughput::Elements(points));
    for (name, q, period) in [("lossless_intra", 1, 1), ("lossless_inter", 1, 8), ("q4_inter", 4, 8)] {
        let cfg = PipelineConfig {
            codec: CodecParams { geometry_qstep: q, attribute_qstep: q, inter_period: period, ..CodecParams::default() },
            ..PipelineConfig::default()
        };
        g.bench_function(format!("encode/{name}"), |b| b.iter(|| encode_clouds(black_box(&seq), &cfg).unwrap()));
        let stream = encode_clouds(&seq, &cfg).unwrap().bitstream;
        g.bench_function(format!("decode/{name}"), |b| b.iter(|| decode_clouds(black_box(stream.as_bytes()), None).unwrap()));
    }
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let seq = shell_sequence(2);
    let cfg = PipelineConfig { codec: CodecParams { geometry_qstep: 4, ..CodecParams::default() }, ..Default::default() };
    let decoded = decode_clouds(encode_clouds(&seq[..1], &cfg).unwrap().bitstream.as_bytes(), None).unwrap().clouds;
    c.bench_function("metrics/d1_psnr", |b| {
        b.iter_batched(|| (&seq[0], &decoded[0]), |(a, d)| geometry_psnr_d1(a, d).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, segmentation, codec, metrics);
criterion_main!(benches);
