//! Decoder side: maps back to 3D points and merging of sections.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::atlas::{unpack, AtlasError};
use crate::cloud::{max_coord, CloudError, Color, Point, PointCloud};
use crate::codec::FrameData;
use crate::projection::MapSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReconstructError {
    #[error("inconsistent maps for section {section_id}: {reason}")]
    InconsistentMaps { section_id: u32, reason: String },
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

/// Lifts every occupied pixel back to 3D: the near-layer point, plus the
/// far-layer point when its depth differs. Coordinates are clamped into the
/// voxel grid of `bit_depth` (lossy depths can overshoot it).
pub fn unproject(mapset: &MapSet, bit_depth: u8) -> Result<Vec<(Point, Color)>, ReconstructError> {
    let area = mapset.area();
    let lens = [mapset.occupancy.len(), mapset.d0.len(), mapset.d1.len(), mapset.a0.len(), mapset.a1.len()];
    if lens.iter().any(|&l| l != area) {
        return Err(ReconstructError::InconsistentMaps {
            section_id: mapset.section_id,
            reason: format!("channel lengths {lens:?} for a {}x{} map", mapset.width, mapset.height),
        });
    }
    let (u, v) = mapset.plane.axis.others();
    let (pu, pv, pd) = (u.index(), v.index(), mapset.plane.axis.index());
    let max = max_coord(bit_depth) as i64;
    let [u0, v0, depth0] = mapset.origin.map(i64::from);
    let w = mapset.width as usize;
    let lift = |x: usize, y: usize, d: u16| -> Point {
        let depth = if mapset.plane.positive { depth0 + d as i64 } else { depth0 - d as i64 };
        let mut p = [0u32; 3];
        p[pu] = (u0 + x as i64).clamp(0, max) as u32;
        p[pv] = (v0 + y as i64).clamp(0, max) as u32;
        p[pd] = depth.clamp(0, max) as u32;
        p
    };
    let mut out = Vec::with_capacity(2 * mapset.occupied());
    for (i, &o) in mapset.occupancy.iter().enumerate() {
        if o == 0 {
            continue;
        }
        let (x, y) = (i % w, i / w);
        out.push((lift(x, y, mapset.d0[i]), mapset.a0[i]));
        if mapset.d1[i] != mapset.d0[i] {
            out.push((lift(x, y, mapset.d1[i]), mapset.a1[i]));
        }
    }
    Ok(out)
}

/// Concatenates sections in the given order (lowest section id first).
///
/// Exact duplicates keep the first occurrence. With `dedup_radius > 0` a
/// point is also dropped when an already kept point of a different section
/// lies within that L∞ distance.
pub fn merge_sections(parts: &[Vec<(Point, Color)>], dedup_radius: u32, bit_depth: u8) -> Result<PointCloud, ReconstructError> {
    let total: usize = parts.iter().map(Vec::len).sum();
    let mut points = Vec::with_capacity(total);
    let mut colors = Vec::with_capacity(total);
    let mut seen: HashSet<Point> = HashSet::with_capacity(total);

    let cell = dedup_radius as i64 + 1;
    let key = |p: &Point| p.map(|c| c as i64 / cell);
    let mut grid: HashMap<[i64; 3], Vec<(Point, usize)>> = HashMap::new();

    for (part_idx, part) in parts.iter().enumerate() {
        for &(p, c) in part {
            if seen.contains(&p) {
                continue;
            }
            if dedup_radius > 0 {
                let k = key(&p);
                let r = dedup_radius as i64;
                let mut near = false;
                'scan: for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            if let Some(bucket) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                                if bucket.iter().any(|&(q, s)| {
                                    s != part_idx && (0..3).all(|a| (p[a] as i64 - q[a] as i64).abs() <= r)
                                }) {
                                    near = true;
                                    break 'scan;
                                }
                            }
                        }
                    }
                }
                if near {
                    continue;
                }
                grid.entry(k).or_default().push((p, part_idx));
            }
            seen.insert(p);
            points.push(p);
            colors.push(c);
        }
    }
    Ok(PointCloud::new(points, colors, bit_depth)?)
}

/// Full reconstruction of a decoded frame.
pub fn reconstruct_frame(frame: &FrameData, bit_depth: u8, dedup_radius: u32) -> Result<PointCloud, ReconstructError> {
    let dims: Vec<_> = frame.sections.iter().map(|s| s.dims()).collect();
    let maps = unpack(&frame.atlas, &dims)?;
    let mut order: Vec<usize> = (0..maps.len()).collect();
    order.sort_by_key(|&i| maps[i].section_id);
    let parts: Vec<Vec<(Point, Color)>> =
        order.par_iter().map(|&i| unproject(&maps[i], bit_depth)).collect::<Result<_, _>>()?;
    merge_sections(&parts, dedup_radius, bit_depth)
}
