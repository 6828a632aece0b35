use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use xpcc_core::codec::decode_sequence;
use xpcc_core::image::dump_atlas;
use xpcc_core::pipeline::{analyze_frame, build_frame, decode_clouds, encode_clouds, evaluate, run_ladder, FrameMetrics};
use xpcc_core::projection::evaluate_planes;
use xpcc_core::section::layer_profile_ids;
use xpcc_core::{load_ply, save_ply, PipelineConfig, PointCloud};

use crate::plot::{self, Series};

/// A literal file path, or else a glob pattern expanded in sorted order.
pub fn expand_inputs(pattern: &str) -> Result<Vec<PathBuf>> {
    let literal = Path::new(pattern);
    if literal.is_file() {
        return Ok(vec![literal.to_path_buf()]);
    }
    let mut paths = glob::glob(pattern)
        .with_context(|| format!("bad glob pattern {pattern:?}"))?
        .collect::<Result<Vec<_>, _>>()?;
    paths.retain(|p| p.is_file());
    paths.sort();
    if paths.is_empty() {
        bail!("no input file matches {pattern:?}");
    }
    Ok(paths)
}

fn load_frames(pattern: &str, bit_depth: u8) -> Result<Vec<PointCloud>> {
    expand_inputs(pattern)?
        .iter()
        .map(|path| {
            let loaded = load_ply(path, bit_depth).with_context(|| format!("reading {}", path.display()))?;
            if loaded.duplicates > 0 {
                log::warn!("{}: merged {} duplicate points", path.display(), loaded.duplicates);
            }
            Ok(loaded.cloud)
        })
        .collect()
}

/// File stem of the first input, for the CSV `sequence` column.
pub fn sequence_label(pattern: &str) -> String {
    let first = expand_inputs(pattern).ok().and_then(|p| p.into_iter().next());
    first
        .as_deref()
        .and_then(Path::file_stem)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into())
}

pub fn encode(input: &str, output: &Path, cfg: &PipelineConfig) -> Result<()> {
    let clouds = load_frames(input, cfg.bit_depth)?;
    let enc = encode_clouds(&clouds, cfg)?;
    for s in &enc.summaries {
        println!(
            "frame {:04}: points {} sections {} lost {} occupancy {:.4} bytes {}{}",
            s.frame,
            s.points,
            s.sections,
            s.lost_points,
            s.occupancy_ratio,
            s.bytes,
            if s.intra { " intra" } else { "" }
        );
    }
    if let Err(e) = fs::write(output, enc.bitstream.as_bytes()) {
        let _ = fs::remove_file(output);
        return Err(e).with_context(|| format!("writing {}", output.display()));
    }
    println!("{} frames, {} bytes -> {}", clouds.len(), enc.bitstream.len(), output.display());
    Ok(())
}

pub fn decode(stream: &Path, out_dir: &Path, dedup_radius: Option<u32>) -> Result<()> {
    let bytes = fs::read(stream).with_context(|| format!("reading {}", stream.display()))?;
    let dec = decode_clouds(&bytes, dedup_radius).with_context(|| format!("decoding {}", stream.display()))?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (i, cloud) in dec.clouds.iter().enumerate() {
        let path = out_dir.join(format!("frame_{i:04}.ply"));
        save_ply(cloud, &path).with_context(|| format!("writing {}", path.display()))?;
        println!("frame {i:04}: {} points -> {}", cloud.len(), path.display());
    }
    Ok(())
}

pub fn analyze(input: &Path, cfg: &PipelineConfig, output: Option<&Path>, dump: Option<&Path>) -> Result<()> {
    let loaded = load_ply(input, cfg.bit_depth).with_context(|| format!("reading {}", input.display()))?;
    let cloud = &loaded.cloud;
    let analysis = analyze_frame(cloud, cfg)?;
    let frame = build_frame(&analysis, cfg, None)?;
    let thickness = cfg.segmentation.surface_thickness;
    let candidates = cfg.candidate_planes();

    let mut sections = Vec::with_capacity(analysis.sections.len());
    for ((s, choice), maps) in analysis.sections.iter().zip(&analysis.planes).zip(&analysis.maps) {
        let profile = layer_profile_ids(cloud, &s.point_ids, s.axis, choice.plane, thickness, s.slab)?;
        let scores: Vec<_> = evaluate_planes(cloud, s, &candidates, thickness)
            .into_iter()
            .map(|c| json!({ "plane": c.plane.to_string(), "unchanged_ratio": c.unchanged_ratio, "lost": c.lost_count }))
            .collect();
        sections.push(json!({
            "section_id": s.section_id,
            "axis": s.axis,
            "slab": s.slab,
            "band": s.band,
            "ellipse": s.ellipse,
            "overlap_lo": s.overlap_lo,
            "overlap_hi": s.overlap_hi,
            "points": s.len(),
            "plane": choice.plane.to_string(),
            "lost": maps.lost_ids.len(),
            "max_layers": profile.max(),
            "layer_profile": profile,
            "plane_scores": scores,
        }));
    }
    let report = json!({
        "input": input.display().to_string(),
        "points": cloud.len(),
        "duplicates_merged": loaded.duplicates,
        "axis": analysis.axis,
        "lost_points": analysis.lost_points(),
        "atlas": {
            "width": frame.atlas.width,
            "height": frame.atlas.height,
            "occupancy_ratio": xpcc_core::atlas::occupancy_ratio(&frame.atlas)?,
        },
        "sections": sections,
    });
    let text = serde_json::to_string_pretty(&report)?;
    match output {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    if let Some(dir) = dump {
        dump_atlas(&frame.atlas, dir).with_context(|| format!("dumping maps into {}", dir.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CsvRow<'a> {
    sequence: &'a str,
    frame: usize,
    qstep: u32,
    geom_bits: u64,
    attr_bits: u64,
    d1_psnr: f64,
    color_psnr: f64,
    temporal_mad: Option<f64>,
    occupancy_ratio: f64,
}

fn write_csv<'a>(path: &Path, rows: impl IntoIterator<Item = (u32, &'a FrameMetrics)>, label: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for (qstep, m) in rows {
        w.serialize(CsvRow {
            sequence: label,
            frame: m.frame,
            qstep,
            geom_bits: m.geom_bits,
            attr_bits: m.attr_bits,
            d1_psnr: m.d1_psnr,
            color_psnr: m.color_psnr,
            temporal_mad: m.temporal_mad,
            occupancy_ratio: m.occupancy_ratio,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn evaluate_stream(
    original: &str,
    decoded: Option<&str>,
    stream: &Path,
    cfg: &PipelineConfig,
    label: &str,
    csv_path: &Path,
) -> Result<()> {
    let originals = load_frames(original, cfg.bit_depth)?;
    let bytes = fs::read(stream).with_context(|| format!("reading {}", stream.display()))?;
    let (clouds, sequence) = match decoded {
        Some(pattern) => {
            let sequence = decode_sequence(&bytes)?;
            (load_frames(pattern, sequence.bit_depth)?, sequence)
        }
        None => {
            let dec = decode_clouds(&bytes, cfg.dedup_radius)?;
            (dec.clouds, dec.sequence)
        }
    };
    let rows = evaluate(&originals, &clouds, &sequence)?;
    let q = sequence.params.geometry_qstep;
    write_csv(csv_path, rows.iter().map(|r| (q, r)), label)?;
    let n = rows.len().max(1) as f64;
    println!(
        "{} frames: mean D1 {:.2} dB, mean color {:.2} dB -> {}",
        rows.len(),
        rows.iter().map(|r| r.d1_psnr).sum::<f64>() / n,
        rows.iter().map(|r| r.color_psnr).sum::<f64>() / n,
        csv_path.display()
    );
    Ok(())
}

pub fn evaluate_ladder(
    original: &str,
    ladder: &[u32],
    cfg: &PipelineConfig,
    label: &str,
    csv_path: &Path,
    svg_path: &Path,
) -> Result<()> {
    if ladder.is_empty() {
        bail!("--ladder needs at least one qstep");
    }
    let originals = load_frames(original, cfg.bit_depth)?;
    let rungs = run_ladder(&originals, cfg, ladder)?;
    write_csv(csv_path, rungs.iter().flat_map(|r| r.rows.iter().map(move |m| (r.qstep, m))), label)?;

    let mut geometry = Series::new("D1 geometry");
    let mut color = Series::new("color (mean RGB)");
    for r in &rungs {
        println!(
            "qstep {:>3}: {} bytes, {:.0} bps, D1 {:.2} dB, color {:.2} dB",
            r.qstep, r.stream_bytes, r.bits_per_second, r.mean_d1_psnr, r.mean_color_psnr
        );
        geometry.push(r.bits_per_second, r.mean_d1_psnr);
        color.push(r.bits_per_second, r.mean_color_psnr);
    }
    let svg = plot::rd_svg(&format!("{label}: rate-distortion"), &[geometry, color]);
    fs::write(svg_path, svg).with_context(|| format!("writing {}", svg_path.display()))?;
    println!("{} -> {}, {}", label, csv_path.display(), svg_path.display());
    Ok(())
}
