//! Orthographic projection of a cross-section onto an axis-aligned plane,
//! producing an occupancy map, two depth layers (near/far) and their colors.

use serde::{Deserialize, Serialize};

use crate::axis::SignedAxis;
use crate::cloud::{Aabb, Color, Point, PointCloud};
use crate::section::CrossSection;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjectionError {
    #[error("section {0} has no points")]
    EmptySection(u32),
    #[error("no candidate planes given")]
    NoCandidates,
    #[error("section size must be at least 1")]
    ZeroSectionSize,
}

/// One section's maps. Pixel `(x, y)` lives at index `y * width + x`.
///
/// Pixel axes are the two axes orthogonal to `plane`, in increasing axis
/// order; `origin` holds the voxel coordinates of pixel `(0, 0)` along those
/// axes and the depth reference (bounding-box face nearest the viewer).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSet {
    pub section_id: u32,
    pub plane: SignedAxis,
    /// `(u0, v0, depth0)`.
    pub origin: [u32; 3],
    pub width: u32,
    pub height: u32,
    /// 1 where the pixel holds a point, 0 elsewhere.
    pub occupancy: Vec<u8>,
    pub d0: Vec<u16>,
    pub d1: Vec<u16>,
    pub a0: Vec<Color>,
    pub a1: Vec<Color>,
    /// Section point ids that did not fit in two layers.
    pub lost_ids: Vec<usize>,
}

impl MapSet {
    /// Blank maps of the given geometry.
    pub fn blank(section_id: u32, plane: SignedAxis, origin: [u32; 3], width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        MapSet {
            section_id,
            plane,
            origin,
            width,
            height,
            occupancy: vec![0; n],
            d0: vec![0; n],
            d1: vec![0; n],
            a0: vec![[0; 3]; n],
            a1: vec![[0; 3]; n],
            lost_ids: Vec::new(),
        }
    }

    pub fn area(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn occupied(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o != 0).count()
    }

    /// Points represented by the maps: one per occupied pixel plus one per
    /// pixel whose far layer differs from the near layer.
    pub fn captured(&self) -> usize {
        self.occupancy
            .iter()
            .zip(self.d0.iter().zip(&self.d1))
            .filter(|(&o, _)| o != 0)
            .map(|(_, (a, b))| if a != b { 2 } else { 1 })
            .sum()
    }
}

/// Plane evaluation result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneChoice {
    pub plane: SignedAxis,
    pub unchanged_ratio: f64,
    pub lost_count: usize,
}

/// Indices (into a depth-sorted column) of the near and far layer points.
///
/// Columns of at most two points keep both. Longer columns keep the nearest
/// point and, for the far layer, the farthest point lying within
/// `thickness` of the first point of the farthest depth cluster (or of the
/// near point when the column is a single cluster).
pub(crate) fn pick_layers(sorted_depths: &[u32], thickness: u32) -> (usize, usize) {
    let n = sorted_depths.len();
    debug_assert!(n > 0);
    if n <= 2 {
        return (0, n - 1);
    }
    let far_start = (1..n)
        .rev()
        .find(|&i| sorted_depths[i] - sorted_depths[i - 1] > thickness)
        .unwrap_or(0);
    let limit = sorted_depths[far_start] + thickness;
    let far = (far_start..n).rev().find(|&i| sorted_depths[i] <= limit).unwrap_or(far_start);
    (0, far)
}

struct Layout {
    pu: usize,
    pv: usize,
    pd: usize,
    origin: [u32; 3],
    width: u32,
    height: u32,
    positive: bool,
}

impl Layout {
    fn new(bb: &Aabb, plane: SignedAxis) -> Self {
        let (u, v) = plane.axis.others();
        let (pu, pv, pd) = (u.index(), v.index(), plane.axis.index());
        let depth0 = if plane.positive { bb.min[pd] } else { bb.max[pd] };
        Layout {
            pu,
            pv,
            pd,
            origin: [bb.min[pu], bb.min[pv], depth0],
            width: bb.max[pu] - bb.min[pu] + 1,
            height: bb.max[pv] - bb.min[pv] + 1,
            positive: plane.positive,
        }
    }

    #[inline]
    fn pixel(&self, p: Point) -> u32 {
        (p[self.pv] - self.origin[1]) * self.width + (p[self.pu] - self.origin[0])
    }

    #[inline]
    fn depth(&self, p: Point) -> u32 {
        if self.positive {
            p[self.pd] - self.origin[2]
        } else {
            self.origin[2] - p[self.pd]
        }
    }
}

/// `(pixel, depth, id)` sorted by pixel then depth.
fn keyed(cloud: &PointCloud, ids: &[usize], layout: &Layout) -> Vec<(u32, u32, usize)> {
    let pts = cloud.points();
    let mut k: Vec<(u32, u32, usize)> = ids
        .iter()
        .map(|&i| (layout.pixel(pts[i]), layout.depth(pts[i]), i))
        .collect();
    k.sort_unstable();
    k
}

/// Projects the points `ids` onto `plane`.
pub fn project_ids(
    cloud: &PointCloud,
    ids: &[usize],
    section_id: u32,
    plane: SignedAxis,
    surface_thickness: u32,
) -> Result<MapSet, ProjectionError> {
    let pts = cloud.points();
    let bb = Aabb::of_points(ids.iter().map(|&i| pts[i])).ok_or(ProjectionError::EmptySection(section_id))?;
    let layout = Layout::new(&bb, plane);
    let mut maps = MapSet::blank(section_id, plane, layout.origin, layout.width, layout.height);
    let colors = cloud.colors();
    let mut depths = Vec::new();
    for group in keyed(cloud, ids, &layout).chunk_by(|a, b| a.0 == b.0) {
        depths.clear();
        depths.extend(group.iter().map(|g| g.1));
        let (near, far) = pick_layers(&depths, surface_thickness);
        let px = group[0].0 as usize;
        maps.occupancy[px] = 1;
        maps.d0[px] = group[near].1 as u16;
        maps.d1[px] = group[far].1 as u16;
        maps.a0[px] = colors[group[near].2];
        maps.a1[px] = colors[group[far].2];
        maps.lost_ids.extend(
            group
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != near && j != far)
                .map(|(_, g)| g.2),
        );
    }
    maps.lost_ids.sort_unstable();
    Ok(maps)
}

pub fn project_section(
    cloud: &PointCloud,
    section: &CrossSection,
    plane: SignedAxis,
    surface_thickness: u32,
) -> Result<MapSet, ProjectionError> {
    project_ids(cloud, &section.point_ids, section.section_id, plane, surface_thickness)
}

/// Number of points of `ids` that `plane` cannot represent, without
/// building the maps.
pub fn lost_count_ids(cloud: &PointCloud, ids: &[usize], plane: SignedAxis, surface_thickness: u32) -> usize {
    let pts = cloud.points();
    let Some(bb) = Aabb::of_points(ids.iter().map(|&i| pts[i])) else {
        return 0;
    };
    let layout = Layout::new(&bb, plane);
    let mut k: Vec<(u32, u32)> = ids.iter().map(|&i| (layout.pixel(pts[i]), layout.depth(pts[i]))).collect();
    k.sort_unstable();
    let mut lost = 0;
    let mut depths = Vec::new();
    for group in k.chunk_by(|a, b| a.0 == b.0) {
        if group.len() <= 2 {
            continue;
        }
        depths.clear();
        depths.extend(group.iter().map(|g| g.1));
        let (near, far) = pick_layers(&depths, surface_thickness);
        lost += group.len() - if near == far { 1 } else { 2 };
    }
    lost
}

/// Captured fraction of a section of `section_size` points.
pub fn unchanged_ratio(mapset: &MapSet, section_size: usize) -> Result<f64, ProjectionError> {
    if section_size == 0 {
        return Err(ProjectionError::ZeroSectionSize);
    }
    let captured = section_size.saturating_sub(mapset.lost_ids.len());
    Ok(captured as f64 / section_size as f64)
}

/// Best candidate for a non-empty id set: most captured points, then
/// candidate order.
pub(crate) fn best_plane_ids(
    cloud: &PointCloud,
    ids: &[usize],
    candidates: &[SignedAxis],
    surface_thickness: u32,
) -> PlaneChoice {
    let n = ids.len().max(1);
    let mut best: Option<PlaneChoice> = None;
    for &plane in candidates {
        let lost = lost_count_ids(cloud, ids, plane, surface_thickness);
        if best.is_none_or(|b| lost < b.lost_count) {
            best = Some(PlaneChoice {
                plane,
                unchanged_ratio: (ids.len() - lost) as f64 / n as f64,
                lost_count: lost,
            });
        }
        if lost == 0 {
            break;
        }
    }
    best.expect("candidates non-empty")
}

/// Picks the candidate plane that leaves the most points unchanged.
/// Ties go to the earlier candidate.
pub fn choose_plane(
    cloud: &PointCloud,
    section: &CrossSection,
    candidates: &[SignedAxis],
    surface_thickness: u32,
) -> Result<PlaneChoice, ProjectionError> {
    if candidates.is_empty() {
        return Err(ProjectionError::NoCandidates);
    }
    if section.is_empty() {
        return Err(ProjectionError::EmptySection(section.section_id));
    }
    Ok(best_plane_ids(cloud, &section.point_ids, candidates, surface_thickness))
}

/// Every candidate's score, in candidate order.
pub fn evaluate_planes(
    cloud: &PointCloud,
    section: &CrossSection,
    candidates: &[SignedAxis],
    surface_thickness: u32,
) -> Vec<PlaneChoice> {
    let n = section.len().max(1);
    candidates
        .iter()
        .map(|&plane| {
            let lost = lost_count_ids(cloud, &section.point_ids, plane, surface_thickness);
            PlaneChoice { plane, unchanged_ratio: (section.len() - lost) as f64 / n as f64, lost_count: lost }
        })
        .collect()
}
