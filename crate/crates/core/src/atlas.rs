//! Skyline bottom-left packing of section maps into one atlas frame.

use serde::{Deserialize, Serialize};

use crate::axis::SignedAxis;
use crate::cloud::Color;
use crate::projection::MapSet;

pub const DEFAULT_ATLAS_WIDTH: u32 = 1024;
pub const DEFAULT_ALIGNMENT: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AtlasError {
    #[error("map of section {section_id} ({width}x{height}) does not fit in atlas width {atlas_width}")]
    MapTooWide { section_id: u32, width: u32, height: u32, atlas_width: u32 },
    #[error("map of section {0} has zero area")]
    EmptyMap(u32),
    #[error("alignment must be at least 1")]
    BadAlignment,
    #[error("atlas has zero area")]
    ZeroArea,
    #[error("inconsistent atlas metadata: {0}")]
    InconsistentMetadata(String),
}

/// Top-left corner of a section's map inside the atlas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub section_id: u32,
    pub u: u32,
    pub v: u32,
    /// Map dimensions before rotation.
    pub width: u32,
    pub height: u32,
    /// Map stored transposed: atlas `(u + y, v + x)` holds map pixel `(x, y)`.
    pub rotated: bool,
}

impl Placement {
    /// Footprint `(width, height)` in the atlas.
    pub fn footprint(&self) -> (u32, u32) {
        if self.rotated {
            (self.height, self.width)
        } else {
            (self.width, self.height)
        }
    }

    pub fn rect(&self) -> (u32, u32, u32, u32) {
        let (w, h) = self.footprint();
        (self.u, self.v, w, h)
    }
}

/// Everything needed to cut a map back out of an atlas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDims {
    pub section_id: u32,
    pub plane: SignedAxis,
    pub origin: [u32; 3],
    pub width: u32,
    pub height: u32,
}

impl MapDims {
    pub fn of(m: &MapSet) -> Self {
        MapDims { section_id: m.section_id, plane: m.plane, origin: m.origin, width: m.width, height: m.height }
    }

    /// Footprint `(width, height)` in the atlas.
    pub fn footprint(&self, rotated: bool) -> (u32, u32) {
        if rotated {
            (self.height, self.width)
        } else {
            (self.width, self.height)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atlas {
    pub width: u32,
    pub height: u32,
    /// One per input map, in input order.
    pub placements: Vec<Placement>,
    pub occupancy: Vec<u8>,
    pub geometry_d0: Vec<u16>,
    pub geometry_d1: Vec<u16>,
    pub attribute_a0: Vec<Color>,
    pub attribute_a1: Vec<Color>,
}

impl Atlas {
    pub fn blank(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Atlas {
            width,
            height,
            placements: Vec::new(),
            occupancy: vec![0; n],
            geometry_d0: vec![0; n],
            geometry_d1: vec![0; n],
            attribute_a0: vec![[0; 3]; n],
            attribute_a1: vec![[0; 3]; n],
        }
    }

    pub fn area(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn occupied_pixels(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o != 0).count()
    }
}

pub fn occupancy_ratio(atlas: &Atlas) -> Result<f64, AtlasError> {
    if atlas.area() == 0 {
        return Err(AtlasError::ZeroArea);
    }
    Ok(atlas.occupied_pixels() as f64 / atlas.area() as f64)
}

#[inline]
fn round_up(v: u32, a: u32) -> u32 {
    v.div_ceil(a) * a
}

#[derive(Debug, Clone, Copy)]
struct SkyNode {
    x: u32,
    y: u32,
    w: u32,
}

struct Skyline {
    width: u32,
    nodes: Vec<SkyNode>,
}

impl Skyline {
    fn new(width: u32) -> Self {
        Skyline { width, nodes: vec![SkyNode { x: 0, y: 0, w: width }] }
    }

    /// Lowest row a `w`-wide rectangle can sit on when its left edge is at
    /// node `i`.
    fn fit(&self, i: usize, w: u32) -> Option<u32> {
        let x = self.nodes[i].x;
        if x + w > self.width {
            return None;
        }
        let mut y = 0;
        let mut covered = 0;
        for n in &self.nodes[i..] {
            if covered >= w {
                break;
            }
            y = y.max(n.y);
            covered += n.w;
        }
        Some(y)
    }

    /// Best `(top, x, y)` for a `w × h` rectangle.
    fn best(&self, w: u32, h: u32) -> Option<(u32, u32, u32)> {
        (0..self.nodes.len())
            .filter_map(|i| self.fit(i, w).map(|y| (y + h, self.nodes[i].x, y)))
            .min()
    }

    fn place(&mut self, x: u32, y: u32, w: u32, h: u32) {
        let right = x + w;
        let mut next = Vec::with_capacity(self.nodes.len() + 2);
        for n in &self.nodes {
            let (l, r) = (n.x, n.x + n.w);
            if r <= x || l >= right {
                next.push(*n);
                continue;
            }
            if l < x {
                next.push(SkyNode { x: l, y: n.y, w: x - l });
            }
            if l <= x {
                next.push(SkyNode { x, y: y + h, w });
            }
            if r > right {
                next.push(SkyNode { x: right, y: n.y, w: r - right });
            }
        }
        // merge equal neighbours
        let mut merged: Vec<SkyNode> = Vec::with_capacity(next.len());
        for n in next {
            match merged.last_mut() {
                Some(m) if m.y == n.y && m.x + m.w == n.x => m.w += n.w,
                _ => merged.push(n),
            }
        }
        self.nodes = merged;
    }
}

/// Packs maps in order of decreasing height, then width, then section id.
/// Each map goes where the skyline top ends lowest, preferring the leftmost
/// spot and then the unrotated orientation. Final dimensions are rounded up
/// to `alignment`.
pub fn pack(mapsets: &[MapSet], atlas_width: u32, alignment: u32) -> Result<Atlas, AtlasError> {
    if alignment == 0 {
        return Err(AtlasError::BadAlignment);
    }
    let mut order: Vec<usize> = (0..mapsets.len()).collect();
    order.sort_by_key(|&i| {
        let m = &mapsets[i];
        (std::cmp::Reverse(m.height), std::cmp::Reverse(m.width), m.section_id)
    });

    let mut sky = Skyline::new(atlas_width);
    let mut placements = vec![None; mapsets.len()];
    let mut top = 0u32;
    for i in order {
        let m = &mapsets[i];
        if m.width == 0 || m.height == 0 {
            return Err(AtlasError::EmptyMap(m.section_id));
        }
        let plain = sky.best(m.width, m.height).map(|(t, x, y)| (t, x, false, y));
        let turned = sky.best(m.height, m.width).map(|(t, x, y)| (t, x, true, y));
        let choice = match (plain, turned) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => {
                return Err(AtlasError::MapTooWide {
                    section_id: m.section_id,
                    width: m.width,
                    height: m.height,
                    atlas_width,
                })
            }
        };
        let (t, x, rotated, y) = choice;
        let (w, h) = if rotated { (m.height, m.width) } else { (m.width, m.height) };
        sky.place(x, y, w, h);
        top = top.max(t);
        placements[i] = Some(Placement { section_id: m.section_id, u: x, v: y, width: m.width, height: m.height, rotated });
    }
    let placements: Vec<Placement> = placements.into_iter().map(|p| p.expect("every map placed")).collect();
    let height = if placements.is_empty() { 0 } else { round_up(top, alignment) };
    Ok(composite(mapsets, placements, round_up(atlas_width, alignment), height))
}

/// Like [`pack`], but reuses `previous`'s placements verbatim when the
/// section ids and map dimensions are unchanged.
pub fn pack_reusing(
    mapsets: &[MapSet],
    atlas_width: u32,
    alignment: u32,
    previous: Option<&Atlas>,
) -> Result<Atlas, AtlasError> {
    if let Some(prev) = previous {
        if layout_matches(mapsets, prev) {
            return Ok(composite(mapsets, prev.placements.clone(), prev.width, prev.height));
        }
    }
    pack(mapsets, atlas_width, alignment)
}

fn layout_matches(mapsets: &[MapSet], prev: &Atlas) -> bool {
    mapsets.len() == prev.placements.len()
        && mapsets
            .iter()
            .zip(&prev.placements)
            .all(|(m, p)| m.section_id == p.section_id && m.width == p.width && m.height == p.height)
}

/// True iff no two `(x, y, w, h)` rectangles intersect.
pub fn rects_disjoint(rects: &[(u32, u32, u32, u32)]) -> bool {
    for (i, a) in rects.iter().enumerate() {
        for b in &rects[i + 1..] {
            let overlap_x = a.0 < b.0 + b.2 && b.0 < a.0 + a.2;
            let overlap_y = a.1 < b.1 + b.3 && b.1 < a.1 + a.3;
            if overlap_x && overlap_y {
                return false;
            }
        }
    }
    true
}

fn composite(mapsets: &[MapSet], placements: Vec<Placement>, width: u32, height: u32) -> Atlas {
    let mut atlas = Atlas::blank(width, height);
    let aw = width as usize;
    for (m, p) in mapsets.iter().zip(&placements) {
        for my in 0..m.height as usize {
            for mx in 0..m.width as usize {
                let src = my * m.width as usize + mx;
                if m.occupancy[src] == 0 {
                    continue;
                }
                let (ax, ay) = if p.rotated { (my, mx) } else { (mx, my) };
                let dst = (p.v as usize + ay) * aw + p.u as usize + ax;
                atlas.occupancy[dst] = 1;
                atlas.geometry_d0[dst] = m.d0[src];
                atlas.geometry_d1[dst] = m.d1[src];
                atlas.attribute_a0[dst] = m.a0[src];
                atlas.attribute_a1[dst] = m.a1[src];
            }
        }
    }
    atlas.placements = placements;
    atlas
}

/// Cuts every map back out of the atlas. `lost_ids` of the result are empty.
pub fn unpack(atlas: &Atlas, dims: &[MapDims]) -> Result<Vec<MapSet>, AtlasError> {
    if dims.len() != atlas.placements.len() {
        return Err(AtlasError::InconsistentMetadata(format!(
            "{} map records for {} placements",
            dims.len(),
            atlas.placements.len()
        )));
    }
    let aw = atlas.width as usize;
    dims.iter()
        .zip(&atlas.placements)
        .map(|(d, p)| {
            if d.section_id != p.section_id || d.width != p.width || d.height != p.height {
                return Err(AtlasError::InconsistentMetadata(format!(
                    "placement for section {} ({}x{}) paired with map of section {} ({}x{})",
                    p.section_id, p.width, p.height, d.section_id, d.width, d.height
                )));
            }
            let (w, h) = d.footprint(p.rotated);
            if p.u as u64 + w as u64 > atlas.width as u64 || p.v as u64 + h as u64 > atlas.height as u64 {
                return Err(AtlasError::InconsistentMetadata(format!(
                    "section {} footprint leaves the {}x{} atlas",
                    d.section_id, atlas.width, atlas.height
                )));
            }
            let mut m = MapSet::blank(d.section_id, d.plane, d.origin, d.width, d.height);
            for my in 0..d.height as usize {
                for mx in 0..d.width as usize {
                    let (ax, ay) = if p.rotated { (my, mx) } else { (mx, my) };
                    let src = (p.v as usize + ay) * aw + p.u as usize + ax;
                    if atlas.occupancy[src] == 0 {
                        continue;
                    }
                    let dst = my * d.width as usize + mx;
                    m.occupancy[dst] = 1;
                    m.d0[dst] = atlas.geometry_d0[src];
                    m.d1[dst] = atlas.geometry_d1[src];
                    m.a0[dst] = atlas.attribute_a0[src];
                    m.a1[dst] = atlas.attribute_a1[src];
                }
            }
            Ok(m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(section_id: u32, width: u32, height: u32) -> MapSet {
        let mut m = MapSet::blank(section_id, SignedAxis::POS_Z, [0; 3], width, height);
        for (i, o) in m.occupancy.iter_mut().enumerate() {
            *o = 1;
            m.d0[i] = i as u16;
            m.d1[i] = i as u16 + 1;
            m.a0[i] = [i as u8, section_id as u8, 0];
            m.a1[i] = [0, i as u8, 7];
        }
        m
    }

    #[test]
    fn two_squares_side_by_side() {
        let a = pack(&[full(0, 4, 4), full(1, 4, 4)], 8, 1).unwrap();
        assert_eq!((a.width, a.height), (8, 4));
        assert_eq!((a.placements[0].u, a.placements[0].v), (0, 0));
        assert_eq!((a.placements[1].u, a.placements[1].v), (4, 0));
        assert_eq!(occupancy_ratio(&a).unwrap(), 1.0);
    }

    #[test]
    fn empty_input() {
        let a = pack(&[], 64, 16).unwrap();
        assert_eq!(a.area(), 0);
        assert!(a.placements.is_empty());
        assert_eq!(occupancy_ratio(&a), Err(AtlasError::ZeroArea));
        assert!(unpack(&a, &[]).unwrap().is_empty());
    }

    #[test]
    fn tall_map_cannot_rotate() {
        let a = pack(&[full(0, 3, 7)], 4, 4).unwrap();
        assert!(!a.placements[0].rotated);
        assert_eq!((a.width, a.height), (4, 8));
    }

    #[test]
    fn wide_map_rotates_to_lower_top() {
        // 2x6 unrotated tops out at 6; rotated 6x2 fits the 8-wide atlas at 2
        let a = pack(&[full(0, 2, 6)], 8, 1).unwrap();
        assert!(a.placements[0].rotated);
        assert_eq!(a.height, 2);
        let back = unpack(&a, &[MapDims::of(&full(0, 2, 6))]).unwrap();
        assert_eq!(back[0], full(0, 2, 6));
    }

    #[test]
    fn half_occupancy() {
        let a = pack(&[full(0, 4, 4)], 8, 1).unwrap();
        assert_eq!(occupancy_ratio(&a).unwrap(), 0.5);
    }

    #[test]
    fn too_wide() {
        assert!(matches!(pack(&[full(0, 9, 9)], 8, 1), Err(AtlasError::MapTooWide { .. })));
        assert_eq!(pack(&[full(0, 1, 1)], 8, 0), Err(AtlasError::BadAlignment));
    }

    #[test]
    fn single_map_at_origin_unpacks_verbatim() {
        let m = full(5, 3, 2);
        let a = pack(std::slice::from_ref(&m), 16, 1).unwrap();
        assert_eq!(a.placements[0], Placement { section_id: 5, u: 0, v: 0, width: 3, height: 2, rotated: false });
        assert_eq!(unpack(&a, &[MapDims::of(&m)]).unwrap(), vec![m]);
    }

    #[test]
    fn unpack_rejects_mismatch() {
        let m = full(5, 3, 2);
        let a = pack(std::slice::from_ref(&m), 16, 1).unwrap();
        let mut d = MapDims::of(&m);
        d.section_id = 6;
        assert!(matches!(unpack(&a, &[d]), Err(AtlasError::InconsistentMetadata(_))));
        assert!(matches!(unpack(&a, &[]), Err(AtlasError::InconsistentMetadata(_))));
        let mut d = MapDims::of(&m);
        d.width = 40;
        assert!(matches!(unpack(&a, &[d]), Err(AtlasError::InconsistentMetadata(_))));
    }

    #[test]
    fn reuse_keeps_layout() {
        let maps = [full(0, 4, 4), full(1, 2, 3)];
        let a = pack(&maps, 16, 4).unwrap();
        let b = pack_reusing(&maps, 16, 4, Some(&a)).unwrap();
        assert_eq!(a, b);
        // changed dims fall back to a fresh pack
        let other = [full(0, 4, 4), full(1, 9, 3)];
        let c = pack_reusing(&other, 16, 4, Some(&a)).unwrap();
        assert_eq!(c, pack(&other, 16, 4).unwrap());
    }

    #[test]
    fn skyline_fills_gaps() {
        let maps = [full(0, 6, 4), full(1, 2, 2), full(2, 2, 2)];
        let a = pack(&maps, 8, 1).unwrap();
        assert_eq!(a.height, 4);
        let rects: Vec<_> = a.placements.iter().map(Placement::rect).collect();
        assert!(rects_disjoint(&rects));
    }
}
