//! Cross-sectional segmentation.
//!
//! A frame is cut into slabs of unit thickness along a cut axis. Consecutive
//! slabs are grouped into cross-sections, each of which should hold a single,
//! roughly elliptic cylinder of surface points so that it projects onto two
//! depth layers with little or no loss.
//!
//! Coordinates inside a slab are written `(u, w)`: the two axes orthogonal to
//! the cut axis, in increasing axis order (for a Y cut, `u = x` and `w = z`).

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::axis::{Axis, SignedAxis};
use crate::cloud::{bounds, Point, PointCloud};
use crate::projection;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SegmentError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("slab {lo}..={hi} along {axis} holds no points")]
    EmptySlab { axis: Axis, lo: u32, hi: u32 },
    #[error("requested {requested} sections but only {available} non-empty slabs exist")]
    InvalidK { requested: usize, available: usize },
    #[error("cannot split into {requested} parts: only {available} slabs available")]
    TooManyParts { requested: usize, available: usize },
    #[error("projection direction {proj} is parallel to the cut axis {cut}")]
    ProjectionAlongCut { cut: Axis, proj: SignedAxis },
    #[error("empty candidate plane list")]
    NoCandidates,
}

/// Elliptic cross-section of a slab: center in the `(u, w)` plane and the
/// semi-axes, `a >= b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub center: [f64; 2],
    pub a: f64,
    pub b: f64,
}

/// Inclusive slab range along the cut axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlabRange {
    pub lo: u32,
    pub hi: u32,
}

impl SlabRange {
    pub fn new(lo: u32, hi: u32) -> Self {
        SlabRange { lo, hi }
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Restriction along a second axis, produced by [`subdivide`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub axis: Axis,
    pub lo: u32,
    pub hi: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub section_id: u32,
    pub axis: Axis,
    pub slab: SlabRange,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub band: Option<Band>,
    pub ellipse: EllipseParams,
    #[serde(skip)]
    pub point_ids: Vec<usize>,
    pub overlap_lo: bool,
    pub overlap_hi: bool,
}

impl CrossSection {
    pub fn len(&self) -> usize {
        self.point_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_ids.is_empty()
    }
}

/// Per-slab maximum number of depth clusters over the slab's pixel columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerProfile {
    /// Cut-axis coordinate of `max_layers[0]`.
    pub first_slab: u32,
    pub max_layers: Vec<u32>,
}

impl LayerProfile {
    pub fn max(&self) -> u32 {
        self.max_layers.iter().copied().max().unwrap_or(0)
    }

    pub fn layers_at(&self, slab: u32) -> u32 {
        slab.checked_sub(self.first_slab)
            .and_then(|i| self.max_layers.get(i as usize).copied())
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionMode {
    /// Grow sections slab by slab while the shape stays a single cylinder.
    Auto,
    /// Exactly `K` sections at the strongest shape discontinuities.
    Manual(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub mode: SectionMode,
    /// Slack on the ring-distance interval, in voxels.
    pub ellipse_tolerance: f64,
    /// Slabs shared across each interior boundary.
    pub overlap_width: u32,
    /// Depth gap (voxels) above which two points belong to different layers.
    pub surface_thickness: u32,
    pub main_view: SignedAxis,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            mode: SectionMode::Auto,
            ellipse_tolerance: 2.0,
            overlap_width: 1,
            surface_thickness: 4,
            main_view: SignedAxis::POS_Z,
        }
    }
}

/// `(u, w)` coordinates of `p` for cut axis `axis`.
#[inline]
pub fn plane_coords(p: Point, axis: Axis) -> (u32, u32) {
    let (u, w) = axis.others();
    (p[u.index()], p[w.index()])
}

/// Euclidean distance in the cut plane.
#[inline]
pub fn ring_distance(point: (f64, f64), center: (f64, f64)) -> f64 {
    (point.0 - center.0).hypot(point.1 - center.1)
}

/// True iff `b - tol <= d <= a + tol`.
#[inline]
pub fn ellipse_membership(d: f64, ellipse: &EllipseParams, tolerance: f64) -> bool {
    ellipse.b - tolerance <= d && d <= ellipse.a + tolerance
}

/// Running `(u, w)` extents of a point set.
#[derive(Debug, Clone, Copy)]
struct PlaneExtent {
    u: (u32, u32),
    w: (u32, u32),
}

impl PlaneExtent {
    fn new(u: u32, w: u32) -> Self {
        PlaneExtent { u: (u, u), w: (w, w) }
    }

    fn include(&mut self, u: u32, w: u32) {
        self.u = (self.u.0.min(u), self.u.1.max(u));
        self.w = (self.w.0.min(w), self.w.1.max(w));
    }

    fn of<I: IntoIterator<Item = (u32, u32)>>(it: I) -> Option<Self> {
        let mut it = it.into_iter();
        let (u, w) = it.next()?;
        let mut e = PlaneExtent::new(u, w);
        for (u, w) in it {
            e.include(u, w);
        }
        Some(e)
    }

    fn center(&self) -> (f64, f64) {
        (
            (self.u.0 as f64 + self.u.1 as f64) / 2.0,
            (self.w.0 as f64 + self.w.1 as f64) / 2.0,
        )
    }

    fn ellipse(&self) -> EllipseParams {
        let c = self.center();
        let hu = (self.u.1 - self.u.0) as f64 / 2.0;
        let hw = (self.w.1 - self.w.0) as f64 / 2.0;
        EllipseParams { center: [c.0, c.1], a: hu.max(hw), b: hu.min(hw) }
    }
}

fn slab_extent(cloud: &PointCloud, axis: Axis, slab: SlabRange) -> Result<PlaneExtent, SegmentError> {
    let k = axis.index();
    PlaneExtent::of(
        cloud
            .points()
            .iter()
            .filter(|p| slab.contains(p[k]))
            .map(|&p| plane_coords(p, axis)),
    )
    .ok_or(SegmentError::EmptySlab { axis, lo: slab.lo, hi: slab.hi })
}

/// Midpoint of the slab's `(u, w)` extents.
pub fn section_center(cloud: &PointCloud, axis: Axis, slab: SlabRange) -> Result<(f64, f64), SegmentError> {
    Ok(slab_extent(cloud, axis, slab)?.center())
}

/// Axis-aligned ellipse from the slab's half-extents; `a` is the larger one.
pub fn fit_ellipse(cloud: &PointCloud, axis: Axis, slab: SlabRange) -> Result<EllipseParams, SegmentError> {
    Ok(slab_extent(cloud, axis, slab)?.ellipse())
}

/// Ellipse fitted to an arbitrary subset of points.
pub fn fit_ellipse_ids(cloud: &PointCloud, axis: Axis, ids: &[usize]) -> Option<EllipseParams> {
    let pts = cloud.points();
    PlaneExtent::of(ids.iter().map(|&i| plane_coords(pts[i], axis))).map(|e| e.ellipse())
}

/// Number of depth clusters in a sorted run of depths.
#[inline]
pub(crate) fn count_clusters(sorted: &[u32], thickness: u32) -> u32 {
    if sorted.is_empty() {
        return 0;
    }
    1 + sorted.windows(2).filter(|w| w[1] - w[0] > thickness).count() as u32
}

/// Per `(slab, column)` cluster counts for the points in `ids`, sorted by key.
/// The column coordinate is the axis orthogonal to both `cut` and `proj`.
pub fn column_layers(
    cloud: &PointCloud,
    ids: &[usize],
    cut: Axis,
    proj: SignedAxis,
    surface_thickness: u32,
) -> Result<Vec<((u32, u32), u32)>, SegmentError> {
    let col_axis = cut
        .third(proj.axis)
        .ok_or(SegmentError::ProjectionAlongCut { cut, proj })?;
    let pts = cloud.points();
    let mut keyed: Vec<(u32, u32, u32)> = ids
        .iter()
        .map(|&i| {
            let p = pts[i];
            (p[cut.index()], p[col_axis.index()], p[proj.axis.index()])
        })
        .collect();
    keyed.sort_unstable();
    let mut out = Vec::new();
    let mut depths = Vec::new();
    for group in keyed.chunk_by(|a, b| a.0 == b.0 && a.1 == b.1) {
        depths.clear();
        depths.extend(group.iter().map(|t| t.2));
        out.push(((group[0].0, group[0].1), count_clusters(&depths, surface_thickness)));
    }
    Ok(out)
}

/// Layer profile of a point subset over the slab range `slabs`.
pub fn layer_profile_ids(
    cloud: &PointCloud,
    ids: &[usize],
    cut: Axis,
    proj: SignedAxis,
    surface_thickness: u32,
    slabs: SlabRange,
) -> Result<LayerProfile, SegmentError> {
    let cols = column_layers(cloud, ids, cut, proj, surface_thickness)?;
    let mut max_layers = vec![0u32; (slabs.hi - slabs.lo + 1) as usize];
    for ((slab, _), n) in cols {
        if slabs.contains(slab) {
            let m = &mut max_layers[(slab - slabs.lo) as usize];
            *m = (*m).max(n);
        }
    }
    Ok(LayerProfile { first_slab: slabs.lo, max_layers })
}

/// Unit-slab layer profile of the whole cloud along `cut`, counting depth
/// clusters along `proj`.
pub fn layer_profile(
    cloud: &PointCloud,
    cut: Axis,
    proj: SignedAxis,
    surface_thickness: u32,
) -> Result<LayerProfile, SegmentError> {
    let bb = bounds(cloud).map_err(|_| SegmentError::EmptyCloud)?;
    let ids: Vec<usize> = (0..cloud.len()).collect();
    let k = cut.index();
    layer_profile_ids(cloud, &ids, cut, proj, surface_thickness, SlabRange::new(bb.min[k], bb.max[k]))
}

/// Cut axis selection:
/// 1. never cut along the main view axis,
/// 2. prefer the longer extent,
/// 3. then the smaller mean per-slab layer count seen from the main view,
/// 4. then X < Y < Z.
pub fn select_axis(cloud: &PointCloud, main_view: SignedAxis, surface_thickness: u32) -> Result<Axis, SegmentError> {
    let bb = bounds(cloud).map_err(|_| SegmentError::EmptyCloud)?;
    let mut candidates: Vec<Axis> = Axis::ALL.into_iter().filter(|&a| a != main_view.axis).collect();
    candidates.sort_by_key(|&a| (Reverse(bb.extent(a)), a));
    let longest = bb.extent(candidates[0]);
    let tied: Vec<Axis> = candidates.into_iter().filter(|&a| bb.extent(a) == longest).collect();
    if tied.len() == 1 {
        return Ok(tied[0]);
    }
    // (sum, count) pairs compared as exact rationals
    let mut best: Option<(Axis, u64, u64)> = None;
    for a in tied {
        let prof = layer_profile(cloud, a, main_view, surface_thickness)?;
        let sum: u64 = prof.max_layers.iter().map(|&n| n as u64).sum();
        let len = prof.max_layers.len() as u64;
        let better = match best {
            None => true,
            Some((_, bs, bl)) => (sum as u128) * (bl as u128) < (bs as u128) * (len as u128),
        };
        if better {
            best = Some((a, sum, len));
        }
    }
    Ok(best.expect("at least one candidate").0)
}

/// Point ids bucketed by cut-axis coordinate.
struct SlabBuckets {
    first: u32,
    buckets: Vec<Vec<usize>>,
}

impl SlabBuckets {
    fn new(cloud: &PointCloud, axis: Axis, lo: u32, hi: u32) -> Self {
        let k = axis.index();
        let mut buckets = vec![Vec::new(); (hi - lo + 1) as usize];
        for (i, p) in cloud.points().iter().enumerate() {
            buckets[(p[k] - lo) as usize].push(i);
        }
        SlabBuckets { first: lo, buckets }
    }

    fn get(&self, slab: u32) -> &[usize] {
        &self.buckets[(slab - self.first) as usize]
    }

    fn non_empty(&self) -> Vec<u32> {
        (0..self.buckets.len() as u32)
            .filter(|&i| !self.buckets[i as usize].is_empty())
            .map(|i| i + self.first)
            .collect()
    }

    fn last(&self) -> u32 {
        self.first + self.buckets.len() as u32 - 1
    }
}

/// Depth clusters of a whole section collapsed along the cut axis, one
/// sorted depth set per column. A section holding one cylinder shows at most
/// two clusters in every column.
struct CollapsedLayers {
    thickness: u32,
    columns: HashMap<u32, (BTreeSet<u32>, u32)>,
    over_two: usize,
}

impl CollapsedLayers {
    fn new(thickness: u32) -> Self {
        CollapsedLayers { thickness, columns: HashMap::new(), over_two: 0 }
    }

    fn clear(&mut self) {
        self.columns.clear();
        self.over_two = 0;
    }

    fn insert(&mut self, col: u32, d: u32) {
        let t = self.thickness;
        let (set, links) = self.columns.entry(col).or_default();
        if set.contains(&d) {
            return;
        }
        let before = set.len() as u32 - *links;
        let pred = set.range(..d).next_back().copied();
        let succ = set.range(d + 1..).next().copied();
        if let (Some(p), Some(s)) = (pred, succ) {
            if s - p <= t {
                *links -= 1;
            }
        }
        if let Some(p) = pred {
            if d - p <= t {
                *links += 1;
            }
        }
        if let Some(s) = succ {
            if s - d <= t {
                *links += 1;
            }
        }
        set.insert(d);
        let after = set.len() as u32 - *links;
        match (before > 2, after > 2) {
            (false, true) => self.over_two += 1,
            (true, false) => self.over_two -= 1,
            _ => {}
        }
    }
}

/// Partitions the frame into cross-sections.
///
/// Auto mode grows a section one slab at a time while either its collapsed
/// layer count stays at most two, or every point of the new slab lies on the
/// running ellipse within the tolerance. Manual mode places `K - 1` cuts at
/// the largest per-slab discontinuities in layer count and ellipse axes.
/// Each interior boundary then extends the lower section by `overlap_width`
/// slabs, so those slabs belong to both neighbours.
pub fn segment(cloud: &PointCloud, config: &SegmentationConfig) -> Result<Vec<CrossSection>, SegmentError> {
    let axis = select_axis(cloud, config.main_view, config.surface_thickness)?;
    segment_along(cloud, axis, config)
}

/// [`segment`] with a fixed cut axis.
pub fn segment_along(cloud: &PointCloud, axis: Axis, config: &SegmentationConfig) -> Result<Vec<CrossSection>, SegmentError> {
    let bb = bounds(cloud).map_err(|_| SegmentError::EmptyCloud)?;
    if axis == config.main_view.axis {
        return Err(SegmentError::ProjectionAlongCut { cut: axis, proj: config.main_view });
    }
    let k = axis.index();
    let buckets = SlabBuckets::new(cloud, axis, bb.min[k], bb.max[k]);
    let non_empty = buckets.non_empty();

    let starts = match config.mode {
        SectionMode::Auto => auto_starts(cloud, axis, config, &buckets, &non_empty),
        SectionMode::Manual(want) => {
            if want == 0 || want > non_empty.len() {
                return Err(SegmentError::InvalidK { requested: want, available: non_empty.len() });
            }
            manual_starts(cloud, axis, config, &buckets, &non_empty, want)?
        }
    };
    Ok(build_sections(cloud, axis, &buckets, &non_empty, &starts, config.overlap_width))
}

/// Rebuilds sections from explicit start slabs (used for layout reuse across
/// frames). Starts are clamped to the frame's extent; empty sections vanish.
pub fn segment_with_starts(
    cloud: &PointCloud,
    axis: Axis,
    starts: &[u32],
    overlap_width: u32,
) -> Result<Vec<CrossSection>, SegmentError> {
    let bb = bounds(cloud).map_err(|_| SegmentError::EmptyCloud)?;
    let k = axis.index();
    let buckets = SlabBuckets::new(cloud, axis, bb.min[k], bb.max[k]);
    let non_empty = buckets.non_empty();
    // keep only starts that open a section holding at least one point
    let mut s: Vec<u32> = vec![non_empty[0]];
    for &st in starts.iter().skip(1) {
        if let Some(&first) = non_empty.iter().find(|&&n| n >= st) {
            if first > *s.last().unwrap() {
                s.push(first);
            }
        }
    }
    Ok(build_sections(cloud, axis, &buckets, &non_empty, &s, overlap_width))
}

fn auto_starts(
    cloud: &PointCloud,
    axis: Axis,
    config: &SegmentationConfig,
    buckets: &SlabBuckets,
    non_empty: &[u32],
) -> Vec<u32> {
    let pts = cloud.points();
    let depth_axis = config.main_view.axis.index();
    let col_axis = axis.third(config.main_view.axis).expect("cut axis differs from main view").index();

    let mut starts = Vec::new();
    let mut layers = CollapsedLayers::new(config.surface_thickness);
    let mut extent: Option<PlaneExtent> = None;

    for &slab in non_empty {
        let ids = buckets.get(slab);
        let grow = match extent {
            None => false,
            Some(ext) => {
                let ellipse = ext.ellipse();
                let c = ext.center();
                let on_ellipse = ids.iter().all(|&i| {
                    let (u, w) = plane_coords(pts[i], axis);
                    ellipse_membership(ring_distance((u as f64, w as f64), c), &ellipse, config.ellipse_tolerance)
                });
                for &i in ids {
                    layers.insert(pts[i][col_axis], pts[i][depth_axis]);
                }
                layers.over_two == 0 || on_ellipse
            }
        };
        if !grow {
            starts.push(slab);
            layers.clear();
            extent = None;
            for &i in ids {
                layers.insert(pts[i][col_axis], pts[i][depth_axis]);
            }
        }
        for &i in ids {
            let (u, w) = plane_coords(pts[i], axis);
            match extent.as_mut() {
                Some(e) => e.include(u, w),
                None => extent = Some(PlaneExtent::new(u, w)),
            }
        }
    }
    starts
}

fn manual_starts(
    cloud: &PointCloud,
    axis: Axis,
    config: &SegmentationConfig,
    buckets: &SlabBuckets,
    non_empty: &[u32],
    want: usize,
) -> Result<Vec<u32>, SegmentError> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    let profile = layer_profile_ids(
        cloud,
        &all,
        axis,
        config.main_view,
        config.surface_thickness,
        SlabRange::new(buckets.first, buckets.last()),
    )?;
    let per_slab: Vec<(u32, EllipseParams)> = non_empty
        .iter()
        .map(|&s| (profile.layers_at(s), fit_ellipse_ids(cloud, axis, buckets.get(s)).expect("non-empty slab")))
        .collect();
    let mut scored: Vec<(f64, u32)> = per_slab
        .windows(2)
        .zip(non_empty.windows(2))
        .map(|(pair, slabs)| {
            let (la, ea) = pair[0];
            let (lb, eb) = pair[1];
            let score = (la as f64 - lb as f64).abs() + (ea.a - eb.a).abs() + (ea.b - eb.b).abs();
            (score, slabs[1])
        })
        .collect();
    scored.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)));
    let mut starts: Vec<u32> = std::iter::once(non_empty[0])
        .chain(scored.into_iter().take(want - 1).map(|(_, s)| s))
        .collect();
    starts.sort_unstable();
    Ok(starts)
}

fn build_sections(
    cloud: &PointCloud,
    axis: Axis,
    buckets: &SlabBuckets,
    non_empty: &[u32],
    starts: &[u32],
    overlap_width: u32,
) -> Vec<CrossSection> {
    let last = *non_empty.last().expect("non-empty cloud");
    let mut cores: Vec<SlabRange> = Vec::with_capacity(starts.len());
    for (j, &lo) in starts.iter().enumerate() {
        let hi = match starts.get(j + 1) {
            // last non-empty slab before the next start
            Some(&next) => *non_empty.iter().rev().find(|&&s| s < next).expect("start is non-empty"),
            None => last,
        };
        cores.push(SlabRange::new(lo, hi));
    }
    let n = cores.len();
    (0..n)
        .map(|j| {
            let core = cores[j];
            let mut slab = core;
            let overlap_hi = j + 1 < n && overlap_width > 0;
            if overlap_hi {
                slab.hi = (core.hi + overlap_width).min(cores[j + 1].hi);
            }
            let overlap_lo = j > 0 && overlap_width > 0;
            let point_ids: Vec<usize> = (slab.lo..=slab.hi).flat_map(|s| buckets.get(s).iter().copied()).collect();
            let core_ids: Vec<usize> = (core.lo..=core.hi).flat_map(|s| buckets.get(s).iter().copied()).collect();
            let ellipse = fit_ellipse_ids(cloud, axis, &core_ids).expect("core holds points");
            CrossSection {
                section_id: j as u32,
                axis,
                slab,
                band: None,
                ellipse,
                point_ids,
                overlap_lo,
                overlap_hi,
            }
        })
        .collect()
}

/// Splits a section into `n_parts` contiguous bands along the axis orthogonal
/// to both its cut axis and its best projection plane, maximizing the summed
/// unchanged ratio of the bands (each band on its own best plane).
///
/// Ties go to the most balanced band widths, then to the lowest boundaries.
/// Parts inherit the parent's `section_id`; callers renumber.
pub fn subdivide(
    section: &CrossSection,
    cloud: &PointCloud,
    n_parts: usize,
    candidate_planes: &[SignedAxis],
    surface_thickness: u32,
) -> Result<Vec<CrossSection>, SegmentError> {
    if candidate_planes.is_empty() {
        return Err(SegmentError::NoCandidates);
    }
    if section.is_empty() {
        return Err(SegmentError::EmptySlab { axis: section.axis, lo: section.slab.lo, hi: section.slab.hi });
    }
    let pts = cloud.points();
    let band_axis = band_axis_for(section, cloud, candidate_planes, surface_thickness)?;
    let ba = band_axis.index();

    let mut positions: Vec<u32> = section.point_ids.iter().map(|&i| pts[i][ba]).collect();
    positions.sort_unstable();
    positions.dedup();
    let n = positions.len();
    if n_parts < 2 || n_parts > n {
        return Err(SegmentError::TooManyParts { requested: n_parts, available: n });
    }

    // score of the band spanning positions[i..j]
    let mut memo: HashMap<(usize, usize), f64> = HashMap::new();
    let mut band_score = |i: usize, j: usize| -> f64 {
        *memo.entry((i, j)).or_insert_with(|| {
            let (lo, hi) = (positions[i], positions[j - 1]);
            let ids: Vec<usize> = section
                .point_ids
                .iter()
                .copied()
                .filter(|&id| (lo..=hi).contains(&pts[id][ba]))
                .collect();
            projection::best_plane_ids(cloud, &ids, candidate_planes, surface_thickness).unchanged_ratio
        })
    };

    let widths = |cuts: &[usize]| -> u32 {
        let mut bounds_: Vec<u32> = Vec::with_capacity(cuts.len() + 2);
        bounds_.push(positions[0]);
        bounds_.extend(cuts.iter().map(|&c| positions[c]));
        let mut w: Vec<u32> = bounds_.windows(2).map(|p| p[1] - p[0]).collect();
        w.push(positions[n - 1] - bounds_[bounds_.len() - 1] + 1);
        w.iter().max().unwrap() - w.iter().min().unwrap()
    };

    const EPS: f64 = 1e-9;
    let mut best: Option<(f64, u32, Vec<usize>)> = None;
    for_each_combination(n - 1, n_parts - 1, |combo| {
        // cut before positions[c]; combo indexes gaps 0..n-1
        let cuts: Vec<usize> = combo.iter().map(|&g| g + 1).collect();
        let mut edges = Vec::with_capacity(n_parts + 1);
        edges.push(0);
        edges.extend_from_slice(&cuts);
        edges.push(n);
        let total: f64 = edges.windows(2).map(|e| band_score(e[0], e[1])).sum();
        let balance = widths(&cuts);
        let better = match &best {
            None => true,
            Some((bt, bb, _)) => total > bt + EPS || ((total - bt).abs() <= EPS && balance < *bb),
        };
        if better {
            best = Some((total, balance, cuts));
        }
    });
    let (_, _, cuts) = best.expect("at least one combination");

    let mut edges = vec![0];
    edges.extend_from_slice(&cuts);
    edges.push(n);
    let parts = edges
        .windows(2)
        .map(|e| {
            let lo = positions[e[0]];
            let hi = if e[1] < n { positions[e[1]] - 1 } else { positions[n - 1] };
            let point_ids: Vec<usize> = section
                .point_ids
                .iter()
                .copied()
                .filter(|&id| (lo..=hi).contains(&pts[id][ba]))
                .collect();
            let ellipse = fit_ellipse_ids(cloud, section.axis, &point_ids).expect("band holds points");
            CrossSection {
                section_id: section.section_id,
                axis: section.axis,
                slab: section.slab,
                band: Some(Band { axis: band_axis, lo, hi }),
                ellipse,
                point_ids,
                overlap_lo: section.overlap_lo,
                overlap_hi: section.overlap_hi,
            }
        })
        .inspect(|p| debug_assert!(!p.point_ids.is_empty(), "band {} empty", p.section_id))
        .collect::<Vec<_>>();
    log::debug!("subdivided section {} into {} bands along {band_axis}", section.section_id, parts.len());
    Ok(parts)
}

/// Axis along which [`subdivide`] cuts bands. When the best plane is parallel
/// to the cut axis the longer of the two remaining extents is used.
pub fn band_axis_for(
    section: &CrossSection,
    cloud: &PointCloud,
    candidate_planes: &[SignedAxis],
    surface_thickness: u32,
) -> Result<Axis, SegmentError> {
    if candidate_planes.is_empty() {
        return Err(SegmentError::NoCandidates);
    }
    let best = projection::best_plane_ids(cloud, &section.point_ids, candidate_planes, surface_thickness);
    if let Some(a) = section.axis.third(best.plane.axis) {
        return Ok(a);
    }
    let pts = cloud.points();
    let bb = crate::cloud::Aabb::of_points(section.point_ids.iter().map(|&i| pts[i]))
        .ok_or(SegmentError::EmptySlab { axis: section.axis, lo: section.slab.lo, hi: section.slab.hi })?;
    let (a, b) = section.axis.others();
    Ok(if bb.extent(b) > bb.extent(a) { b } else { a })
}

/// Calls `f` with every k-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // rightmost position that can still advance
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
