//! End-to-end encode, decode and evaluation of point cloud sequences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::{occupancy_ratio, pack_reusing, Atlas, AtlasError};
use crate::axis::Axis;
use crate::cloud::{CloudError, PointCloud};
use crate::codec::{
    bits_per_second, decode_sequence, encode_sequence_with_stats, Bitstream, CodecError, CodecParams, DecodedSequence,
    FrameData, SectionRecord, StreamStats,
};
use crate::config::PipelineConfig;
use crate::metrics::{attribute_mad, color_psnr, geometry_psnr_d1, MetricsError};
use crate::projection::{choose_plane, project_section, MapSet, PlaneChoice, ProjectionError};
use crate::reconstruct::{reconstruct_frame, ReconstructError};
use crate::section::{select_axis, segment_along, subdivide, CrossSection, SegmentError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{originals} original frames but {decoded} decoded frames")]
    FrameCountMismatch { originals: usize, decoded: usize },
}

/// Segmentation and projection of one frame, before packing.
#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    pub axis: Axis,
    /// Renumbered `0..n` in order.
    pub sections: Vec<CrossSection>,
    pub planes: Vec<PlaneChoice>,
    pub maps: Vec<MapSet>,
    pub point_count: usize,
}

impl FrameAnalysis {
    pub fn lost_points(&self) -> usize {
        self.maps.iter().map(|m| m.lost_ids.len()).sum()
    }
}

pub fn analyze_frame(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<FrameAnalysis, PipelineError> {
    let seg = &cfg.segmentation;
    let candidates = cfg.candidate_planes();
    let axis = select_axis(cloud, seg.main_view, seg.surface_thickness)?;
    let mut sections = segment_along(cloud, axis, seg)?;

    if cfg.subdivide_parts >= 2 {
        let mut split = Vec::with_capacity(sections.len());
        for s in sections {
            let choice = choose_plane(cloud, &s, &candidates, seg.surface_thickness)?;
            if choice.lost_count == 0 {
                split.push(s);
                continue;
            }
            match subdivide(&s, cloud, cfg.subdivide_parts, &candidates, seg.surface_thickness) {
                Ok(parts) => split.extend(parts),
                Err(SegmentError::TooManyParts { .. }) => split.push(s),
                Err(e) => return Err(e.into()),
            }
        }
        sections = split;
    }
    for (i, s) in sections.iter_mut().enumerate() {
        s.section_id = i as u32;
    }

    let projected: Vec<(PlaneChoice, MapSet)> = sections
        .par_iter()
        .map(|s| -> Result<_, PipelineError> {
            let choice = choose_plane(cloud, s, &candidates, seg.surface_thickness)?;
            let maps = project_section(cloud, s, choice.plane, seg.surface_thickness)?;
            Ok((choice, maps))
        })
        .collect::<Result<_, _>>()?;
    let (planes, maps) = projected.into_iter().unzip();
    Ok(FrameAnalysis { axis, sections, planes, maps, point_count: cloud.len() })
}

fn records(sections: &[CrossSection], maps: &[MapSet]) -> Vec<SectionRecord> {
    sections
        .iter()
        .zip(maps)
        .map(|(s, m)| SectionRecord {
            section_id: s.section_id,
            axis: s.axis,
            slab: s.slab,
            band: s.band,
            ellipse: s.ellipse,
            overlap_lo: s.overlap_lo,
            overlap_hi: s.overlap_hi,
            plane: m.plane,
            origin: m.origin,
            width: m.width,
            height: m.height,
        })
        .collect()
}

/// Packs an analysed frame into codec input.
pub fn build_frame(analysis: &FrameAnalysis, cfg: &PipelineConfig, previous: Option<&Atlas>) -> Result<FrameData, PipelineError> {
    let reuse = if cfg.reuse_layout { previous } else { None };
    let atlas = pack_reusing(&analysis.maps, cfg.atlas_width, cfg.alignment, reuse)?;
    Ok(FrameData {
        atlas,
        sections: records(&analysis.sections, &analysis.maps),
        point_count: analysis.point_count as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSummary {
    pub frame: usize,
    pub points: usize,
    pub axis: Axis,
    pub sections: usize,
    pub lost_points: usize,
    pub occupancy_ratio: f64,
    /// Compressed channel bytes of this frame.
    pub bytes: usize,
    pub intra: bool,
}

#[derive(Debug, Clone)]
pub struct EncodeResult {
    pub bitstream: Bitstream,
    pub stats: StreamStats,
    pub frames: Vec<FrameData>,
    pub summaries: Vec<FrameSummary>,
}

pub fn encode_clouds(clouds: &[PointCloud], cfg: &PipelineConfig) -> Result<EncodeResult, PipelineError> {
    let bit_depth = clouds.first().map_or(cfg.bit_depth, PointCloud::bit_depth);
    if let Some(c) = clouds.iter().find(|c| c.bit_depth() != bit_depth) {
        return Err(CloudError::MixedBitDepth(bit_depth, c.bit_depth()).into());
    }
    let analyses: Vec<FrameAnalysis> =
        clouds.par_iter().map(|c| analyze_frame(c, cfg)).collect::<Result<_, _>>()?;

    let mut frames: Vec<FrameData> = Vec::with_capacity(analyses.len());
    for a in &analyses {
        let f = build_frame(a, cfg, frames.last().map(|f| &f.atlas))?;
        frames.push(f);
    }
    let (bitstream, stats) = encode_sequence_with_stats(&frames, &cfg.codec, bit_depth)?;

    let summaries = analyses
        .iter()
        .zip(&frames)
        .zip(&stats.frames)
        .enumerate()
        .map(|(i, ((a, f), s))| {
            Ok(FrameSummary {
                frame: i,
                points: a.point_count,
                axis: a.axis,
                sections: a.sections.len(),
                lost_points: a.lost_points(),
                occupancy_ratio: occupancy_ratio(&f.atlas)?,
                bytes: s.channel_bytes.iter().sum(),
                intra: s.intra,
            })
        })
        .collect::<Result<_, PipelineError>>()?;
    Ok(EncodeResult { bitstream, stats, frames, summaries })
}

#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub clouds: Vec<PointCloud>,
    pub sequence: DecodedSequence,
}

/// Decodes and reconstructs every frame. `dedup_radius = None` uses 0 for
/// lossless streams and 1 otherwise.
pub fn decode_clouds(bytes: &[u8], dedup_radius: Option<u32>) -> Result<DecodeResult, PipelineError> {
    let sequence = decode_sequence(bytes)?;
    let p = sequence.params;
    let radius = dedup_radius.unwrap_or(if p.geometry_qstep == 1 && p.attribute_qstep == 1 { 0 } else { 1 });
    let clouds = sequence
        .frames
        .par_iter()
        .map(|f| reconstruct_frame(f, sequence.bit_depth, radius))
        .collect::<Result<_, _>>()?;
    Ok(DecodeResult { clouds, sequence })
}

/// One CSV row of the evaluation report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub frame: usize,
    pub geom_bits: u64,
    pub attr_bits: u64,
    pub d1_psnr: f64,
    pub color_psnr: f64,
    /// Against the previous decoded atlas; `None` for the first frame.
    pub temporal_mad: Option<f64>,
    pub occupancy_ratio: f64,
}

/// Quality and rate per frame of a decoded stream against the originals.
pub fn evaluate(
    originals: &[PointCloud],
    decoded: &[PointCloud],
    sequence: &DecodedSequence,
) -> Result<Vec<FrameMetrics>, PipelineError> {
    if originals.len() != decoded.len() || decoded.len() != sequence.frames.len() {
        return Err(PipelineError::FrameCountMismatch { originals: originals.len(), decoded: decoded.len() });
    }
    (0..originals.len())
        .into_par_iter()
        .map(|i| {
            let stats = &sequence.stats.frames[i];
            let atlas = &sequence.frames[i].atlas;
            Ok(FrameMetrics {
                frame: i,
                geom_bits: stats.geometry_bytes() as u64 * 8,
                attr_bits: stats.attribute_bytes() as u64 * 8,
                d1_psnr: geometry_psnr_d1(&originals[i], &decoded[i])?,
                color_psnr: color_psnr(&originals[i], &decoded[i])?.average,
                temporal_mad: (i > 0).then(|| attribute_mad(&sequence.frames[i - 1].atlas, atlas)),
                occupancy_ratio: occupancy_ratio(atlas)?,
            })
        })
        .collect()
}

/// One rung of a quantization ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub qstep: u32,
    pub stream_bytes: usize,
    pub bits_per_second: f64,
    pub mean_d1_psnr: f64,
    pub mean_color_psnr: f64,
    pub rows: Vec<FrameMetrics>,
}

/// Encodes, decodes and evaluates the sequence once per qstep (applied to
/// geometry and attributes alike).
pub fn run_ladder(clouds: &[PointCloud], cfg: &PipelineConfig, ladder: &[u32]) -> Result<Vec<LadderPoint>, PipelineError> {
    ladder
        .iter()
        .map(|&q| {
            let mut c = cfg.clone();
            c.codec = CodecParams { geometry_qstep: q, attribute_qstep: q, ..cfg.codec };
            let enc = encode_clouds(clouds, &c)?;
            let dec = decode_clouds(enc.bitstream.as_bytes(), c.dedup_radius)?;
            let rows = evaluate(clouds, &dec.clouds, &dec.sequence)?;
            let n = rows.len().max(1) as f64;
            log::info!("qstep {q}: {} bytes", enc.bitstream.len());
            Ok(LadderPoint {
                qstep: q,
                stream_bytes: enc.bitstream.len(),
                bits_per_second: bits_per_second(enc.bitstream.len(), clouds.len(), c.frame_rate),
                mean_d1_psnr: rows.iter().map(|r| r.d1_psnr).sum::<f64>() / n,
                mean_color_psnr: rows.iter().map(|r| r.color_psnr).sum::<f64>() / n,
                rows,
            })
        })
        .collect()
}
