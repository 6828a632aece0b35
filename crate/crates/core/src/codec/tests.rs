use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn record(id: u32, w: u32, h: u32) -> SectionRecord {
    SectionRecord {
        section_id: id,
        axis: Axis::Y,
        slab: SlabRange { lo: 3, hi: 9 },
        band: Some(Band { axis: Axis::X, lo: 1, hi: 4 }),
        ellipse: EllipseParams { center: [12.5, 7.25], a: 4.0, b: 3.5 },
        overlap_lo: false,
        overlap_hi: true,
        plane: SignedAxis::NEG_Z,
        origin: [1, 3, 40],
        width: w,
        height: h,
    }
}

/// A random frame: one `w`x`h` map placed at the origin of a 32-wide atlas.
fn random_frame(seed: u64, w: u32, h: u32) -> FrameData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atlas = Atlas::blank(32, h.max(1).next_multiple_of(16));
    for y in 0..h as usize {
        for x in 0..w as usize {
            if rng.gen_bool(0.7) {
                let i = y * 32 + x;
                atlas.occupancy[i] = 1;
                atlas.geometry_d0[i] = rng.gen_range(0..1024);
                atlas.geometry_d1[i] = atlas.geometry_d0[i].saturating_add(rng.gen_range(0..4)).min(1023);
                atlas.attribute_a0[i] = rng.gen();
                atlas.attribute_a1[i] = rng.gen();
            }
        }
    }
    atlas.placements = vec![Placement { section_id: 0, u: 0, v: 0, width: w, height: h, rotated: false }];
    FrameData { atlas, sections: vec![record(0, w, h)], point_count: 1234 }
}

fn inter(period: u32) -> CodecParams {
    CodecParams { inter_period: period, ..CodecParams::lossless() }
}

#[test]
fn lossless_single_frame_is_identical() {
    let f = random_frame(1, 20, 12);
    let bs = encode_sequence(&[f.clone()], &CodecParams::lossless(), 10).unwrap();
    let dec = decode_sequence(bs.as_bytes()).unwrap();
    assert_eq!(dec.frames, vec![f]);
    assert_eq!(dec.bit_depth, 10);
    assert_eq!(dec.params, CodecParams::lossless());
}

#[test]
fn mixed_sequence_round_trips() {
    // dims change at frame 2, forcing an intra frame mid-period
    let frames = vec![random_frame(1, 20, 12), random_frame(2, 20, 12), random_frame(3, 9, 30), random_frame(4, 9, 30)];
    let (bs, stats) = encode_sequence_with_stats(&frames, &inter(8), 10).unwrap();
    let intra: Vec<bool> = stats.frames.iter().map(|f| f.intra).collect();
    assert_eq!(intra, [true, false, true, false]);
    let dec = decode_sequence(bs.as_bytes()).unwrap();
    assert_eq!(dec.frames, frames);
    assert_eq!(dec.stats, stats);
}

#[test]
fn identical_frames_code_cheaply() {
    let f = random_frame(7, 30, 16);
    let (_, stats) = encode_sequence_with_stats(&[f.clone(), f], &inter(2), 10).unwrap();
    let size = |k: usize| stats.frames[k].channel_bytes.iter().sum::<usize>();
    assert!(!stats.frames[1].intra);
    assert!(size(1) < size(0), "{} vs {}", size(1), size(0));
}

#[test]
fn encoding_is_deterministic() {
    let frames = vec![random_frame(5, 17, 11), random_frame(6, 17, 11)];
    let a = encode_sequence(&frames, &inter(2), 10).unwrap();
    let b = encode_sequence(&frames, &inter(2), 10).unwrap();
    assert_eq!(a, b);
}

#[test]
fn lossy_error_is_bounded() {
    let frames = vec![random_frame(11, 25, 14), random_frame(12, 25, 14), random_frame(13, 25, 14)];
    for (gq, aq) in [(4, 4), (3, 8), (16, 16)] {
        let params = CodecParams { geometry_qstep: gq, attribute_qstep: aq, inter_period: 3, compressor_level: 6 };
        let dec = decode_sequence(encode_sequence(&frames, &params, 10).unwrap().as_bytes()).unwrap();
        for (src, out) in frames.iter().zip(&dec.frames) {
            let (s, o) = (&src.atlas, &out.atlas);
            assert_eq!(s.occupancy, o.occupancy);
            for p in 0..s.area() {
                assert!(2 * s.geometry_d0[p].abs_diff(o.geometry_d0[p]) as u32 <= gq);
                assert!(2 * s.geometry_d1[p].abs_diff(o.geometry_d1[p]) as u32 <= gq);
                for k in 0..3 {
                    assert!(2 * s.attribute_a0[p][k].abs_diff(o.attribute_a0[p][k]) as u32 <= aq);
                    assert!(2 * s.attribute_a1[p][k].abs_diff(o.attribute_a1[p][k]) as u32 <= aq);
                }
            }
        }
    }
}

#[test]
fn empty_sequence() {
    let bs = encode_sequence(&[], &CodecParams::lossless(), 10).unwrap();
    let dec = decode_sequence(bs.as_bytes()).unwrap();
    assert!(dec.frames.is_empty());
    assert_eq!(bitrate(bs.as_bytes(), 30.0).unwrap().bits_per_second, 0.0);
}

#[test]
fn bitrate_arithmetic() {
    assert_eq!(bits_per_second(1000, 1, 30.0), 240_000.0);
    assert_eq!(bits_per_second(0, 0, 30.0), 0.0);
    let frames = vec![random_frame(1, 10, 10), random_frame(2, 10, 10)];
    let bs = encode_sequence(&frames, &inter(2), 10).unwrap();
    let r = bitrate(bs.as_bytes(), 30.0).unwrap();
    assert_eq!(r.bits_per_second, bs.len() as f64 * 8.0 * 30.0 / 2.0);
    assert_eq!(r.bits_per_point, bs.len() as f64 * 8.0 / 2468.0);
}

#[test]
fn bad_magic() {
    assert_eq!(decode_sequence(&[]), Err(CodecError::BadMagic));
    assert_eq!(decode_sequence(b"XPCD\x01"), Err(CodecError::BadMagic));
}

#[test]
fn truncation_is_reported() {
    let bs = encode_sequence(&[random_frame(3, 12, 12)], &CodecParams::lossless(), 10).unwrap();
    let bytes = bs.as_bytes();
    let (_, stats) = encode_sequence_with_stats(&[random_frame(3, 12, 12)], &CodecParams::lossless(), 10).unwrap();
    for cut in [stats.header_bytes, stats.header_bytes + 1, bytes.len() - 1] {
        assert_eq!(decode_sequence(&bytes[..cut]), Err(CodecError::TruncatedPayload), "cut at {cut}");
    }
}

#[test]
fn header_corruption_is_caught() {
    let frames = vec![random_frame(9, 12, 12), random_frame(10, 12, 12)];
    let (bs, stats) = encode_sequence_with_stats(&frames, &inter(2), 10).unwrap();
    let header_region = stats.header_bytes - 4;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let mut bytes = bs.0.clone();
        let at = rng.gen_range(0..stats.header_bytes);
        bytes[at] ^= rng.gen_range(1..=255u8);
        let err = decode_sequence(&bytes).unwrap_err();
        if at < 4 {
            assert_eq!(err, CodecError::BadMagic);
        } else {
            assert!(matches!(err, CodecError::CrcMismatch { .. }), "byte {at} of {header_region}: {err:?}");
        }
    }
}

#[test]
fn corrupt_occupancy_runs() {
    let f = random_frame(4, 8, 8);
    let (bs, stats) = encode_sequence_with_stats(&[f], &CodecParams::lossless(), 10).unwrap();
    // replace the occupancy block with runs summing to less than the area
    let mut bytes = bs.0[..stats.header_bytes].to_vec();
    let occ = deflate(&[5], 6);
    write_uleb(&mut bytes, occ.len() as u64);
    bytes.extend_from_slice(&occ);
    let mut pos = stats.header_bytes;
    let old_len = read_uleb(&bs.0, &mut pos).unwrap() as usize;
    bytes.extend_from_slice(&bs.0[pos + old_len..]);
    assert!(matches!(decode_sequence(&bytes), Err(CodecError::CorruptRuns(_))));
}

#[test]
fn rejects_bad_params_and_frames() {
    let f = random_frame(1, 5, 5);
    let bad = CodecParams { geometry_qstep: 0, ..CodecParams::lossless() };
    assert!(matches!(encode_sequence(&[f.clone()], &bad, 10), Err(CodecError::InvalidParams(_))));
    let bad = CodecParams { inter_period: 0, ..CodecParams::lossless() };
    assert!(matches!(encode_sequence(&[f.clone()], &bad, 10), Err(CodecError::InvalidParams(_))));
    let mut g = f.clone();
    g.sections.clear();
    assert!(matches!(
        encode_sequence(&[g], &CodecParams::lossless(), 10),
        Err(CodecError::InconsistentFrame { frame: 0, .. })
    ));
}
