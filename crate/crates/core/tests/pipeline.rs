use std::collections::HashSet;

use xpcc_core::codec::CodecParams;
use xpcc_core::config::PipelineConfig;
use xpcc_core::metrics::{geometry_psnr_d1, NearestIndex, PSNR_CAP};
use xpcc_core::pipeline::{decode_clouds, encode_clouds, evaluate, run_ladder};
use xpcc_core::synth::{self, ShellSpec, StackSpec};
use xpcc_core::{CodecError, PipelineError, PointCloud};

fn shell() -> ShellSpec {
    ShellSpec { center: [200, 0, 220], a: 18, b: 11, y0: 40, height: 30 }
}

#[test]
fn multi_frame_lossless_round_trip() {
    let seq = synth::translating_sequence(&shell(), 4, [2, 1, 0]);
    let cfg = PipelineConfig { codec: CodecParams { inter_period: 4, ..CodecParams::lossless() }, ..Default::default() };
    let enc = encode_clouds(&seq, &cfg).unwrap();
    assert_eq!(enc.summaries.len(), 4);
    assert!(enc.summaries.iter().all(|s| s.lost_points == 0));
    assert!(enc.summaries[0].intra && !enc.summaries[1].intra);
    let dec = decode_clouds(enc.bitstream.as_bytes(), None).unwrap();
    for (a, b) in seq.iter().zip(&dec.clouds) {
        assert_eq!(a.sorted_pairs(), b.sorted_pairs());
    }
    let rows = evaluate(&seq, &dec.clouds, &dec.sequence).unwrap();
    assert!(rows.iter().all(|r| r.d1_psnr == PSNR_CAP && r.color_psnr == PSNR_CAP));
    assert_eq!(rows[0].temporal_mad, None);
    assert!(rows[1].temporal_mad.is_some());
}

#[test]
fn lossy_points_stay_within_half_step() {
    let cloud = synth::stacked_cylinders(&StackSpec::default());
    for q in [2u32, 4, 8] {
        let cfg = PipelineConfig {
            codec: CodecParams { geometry_qstep: q, attribute_qstep: q, ..CodecParams::lossless() },
            ..Default::default()
        };
        let enc = encode_clouds(std::slice::from_ref(&cloud), &cfg).unwrap();
        let dec = decode_clouds(enc.bitstream.as_bytes(), None).unwrap();
        let out = &dec.clouds[0];
        assert!(!out.is_empty());
        // only depth is quantized, so each decoded point sits within q/2 of its source along one axis
        let index = NearestIndex::new(cloud.points());
        let half = (q / 2) as u64;
        for &p in out.points() {
            let (_, d) = index.nearest(p).unwrap();
            assert!(d <= half * half, "q={q}: point {p:?} is {d} (squared) from the source");
        }
        assert!(geometry_psnr_d1(&cloud, out).unwrap() < PSNR_CAP);
    }
}

#[test]
fn subdivision_keeps_round_trip_exact() {
    let cloud = synth::stacked_cylinders(&StackSpec::default());
    let cfg = PipelineConfig { subdivide_parts: 2, ..Default::default() };
    let enc = encode_clouds(std::slice::from_ref(&cloud), &cfg).unwrap();
    let ids: HashSet<u32> = enc.frames[0].sections.iter().map(|s| s.section_id).collect();
    assert_eq!(ids.len(), enc.frames[0].sections.len());
    let dec = decode_clouds(enc.bitstream.as_bytes(), None).unwrap();
    assert_eq!(dec.clouds[0].sorted_pairs(), cloud.sorted_pairs());
}

#[test]
fn manual_sections_round_trip() {
    let cloud = synth::elliptic_cylinder_10k();
    let mut cfg = PipelineConfig::default();
    cfg.set("sections", "3").unwrap();
    let enc = encode_clouds(std::slice::from_ref(&cloud), &cfg).unwrap();
    assert_eq!(enc.summaries[0].sections, 3);
    let dec = decode_clouds(enc.bitstream.as_bytes(), None).unwrap();
    assert_eq!(dec.clouds[0].sorted_pairs(), cloud.sorted_pairs());
}

#[test]
fn encoding_is_deterministic_across_thread_counts() {
    let seq = synth::translating_sequence(&shell(), 3, [1, 0, 1]);
    let cfg = PipelineConfig::default();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| encode_clouds(&seq, &cfg).unwrap().bitstream);
    let b = four.install(|| encode_clouds(&seq, &cfg).unwrap().bitstream);
    assert_eq!(a, b);
}

#[test]
fn ladder_reports_every_rung() {
    let cloud = synth::cylinder_shell(&shell());
    let ladder = run_ladder(std::slice::from_ref(&cloud), &PipelineConfig::default(), &[1, 4]).unwrap();
    assert_eq!(ladder.iter().map(|l| l.qstep).collect::<Vec<_>>(), [1, 4]);
    assert_eq!(ladder[0].mean_d1_psnr, PSNR_CAP);
    assert!(ladder[1].stream_bytes < ladder[0].stream_bytes);
}

#[test]
fn errors_surface() {
    assert!(matches!(decode_clouds(&[], None), Err(PipelineError::Codec(CodecError::BadMagic))));
    assert!(encode_clouds(&[PointCloud::empty(10)], &PipelineConfig::default()).is_err());
    let seq = synth::translating_sequence(&shell(), 2, [1, 0, 0]);
    let enc = encode_clouds(&seq, &PipelineConfig::default()).unwrap();
    let dec = decode_clouds(enc.bitstream.as_bytes(), None).unwrap();
    assert!(matches!(
        evaluate(&seq[..1], &dec.clouds, &dec.sequence),
        Err(PipelineError::FrameCountMismatch { originals: 1, decoded: 2 })
    ));
}
