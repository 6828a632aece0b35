//! Voxelized point clouds, bounding boxes and frame sequences.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::axis::Axis;

/// Integer voxel coordinate.
pub type Point = [u32; 3];
/// 8-bit RGB.
pub type Color = [u8; 3];

pub const DEFAULT_BIT_DEPTH: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CloudError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("{points} points but {colors} colors")]
    LengthMismatch { points: usize, colors: usize },
    #[error("coordinate {value} of point {index} does not fit in {bit_depth} bits")]
    OutOfRange { index: usize, value: u32, bit_depth: u8 },
    #[error("duplicate point {point:?} at index {index}")]
    DuplicatePoint { index: usize, point: Point },
    #[error("bit depth {0} outside 1..=16")]
    BadBitDepth(u8),
    #[error("frames disagree on bit depth ({0} vs {1})")]
    MixedBitDepth(u8, u8),
    #[error("frame rate must be positive")]
    BadFrameRate,
}

/// One frame: unique integer voxels with one color each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointCloud {
    points: Vec<Point>,
    colors: Vec<Color>,
    bit_depth: u8,
}

impl PointCloud {
    /// Builds a cloud, rejecting duplicates and out-of-range coordinates.
    pub fn new(points: Vec<Point>, colors: Vec<Color>, bit_depth: u8) -> Result<Self, CloudError> {
        check_bit_depth(bit_depth)?;
        if points.len() != colors.len() {
            return Err(CloudError::LengthMismatch { points: points.len(), colors: colors.len() });
        }
        check_range(&points, bit_depth)?;
        let mut seen = HashSet::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if !seen.insert(*p) {
                return Err(CloudError::DuplicatePoint { index, point: *p });
            }
        }
        Ok(PointCloud { points, colors, bit_depth })
    }

    /// Builds a cloud keeping the first occurrence of each coordinate.
    /// Returns the cloud and the number of dropped duplicates.
    pub fn dedup(points: Vec<Point>, colors: Vec<Color>, bit_depth: u8) -> Result<(Self, usize), CloudError> {
        check_bit_depth(bit_depth)?;
        if points.len() != colors.len() {
            return Err(CloudError::LengthMismatch { points: points.len(), colors: colors.len() });
        }
        check_range(&points, bit_depth)?;
        let total = points.len();
        let mut seen = HashSet::with_capacity(total);
        let mut kept_p = Vec::with_capacity(total);
        let mut kept_c = Vec::with_capacity(points.len());
        for (p, c) in points.into_iter().zip(colors) {
            if seen.insert(p) {
                kept_p.push(p);
                kept_c.push(c);
            }
        }
        let dropped = total - kept_p.len();
        Ok((PointCloud { points: kept_p, colors: kept_c, bit_depth }, dropped))
    }

    pub fn empty(bit_depth: u8) -> Self {
        PointCloud { points: Vec::new(), colors: Vec::new(), bit_depth }
    }

    #[inline]
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest representable coordinate, `2^bit_depth - 1`.
    pub fn max_coord(&self) -> u32 {
        max_coord(self.bit_depth)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, &Color)> {
        self.points.iter().zip(self.colors.iter())
    }

    /// Points and colors sorted by coordinate; handy for set comparisons.
    pub fn sorted_pairs(&self) -> Vec<(Point, Color)> {
        let mut v: Vec<_> = self.iter().map(|(p, c)| (*p, *c)).collect();
        v.sort_unstable();
        v
    }

    pub fn into_parts(self) -> (Vec<Point>, Vec<Color>, u8) {
        (self.points, self.colors, self.bit_depth)
    }
}

pub fn max_coord(bit_depth: u8) -> u32 {
    ((1u64 << bit_depth) - 1) as u32
}

fn check_bit_depth(bit_depth: u8) -> Result<(), CloudError> {
    if (1..=16).contains(&bit_depth) {
        Ok(())
    } else {
        Err(CloudError::BadBitDepth(bit_depth))
    }
}

fn check_range(points: &[Point], bit_depth: u8) -> Result<(), CloudError> {
    let limit = max_coord(bit_depth);
    for (index, p) in points.iter().enumerate() {
        if let Some(&value) = p.iter().find(|&&c| c > limit) {
            return Err(CloudError::OutOfRange { index, value, bit_depth });
        }
    }
    Ok(())
}

/// Inclusive integer bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn of_point(p: Point) -> Self {
        Aabb { min: p, max: p }
    }

    pub fn include(&mut self, p: Point) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    /// `max - min` along `axis`.
    pub fn extent(&self, axis: Axis) -> u32 {
        self.max[axis.index()] - self.min[axis.index()]
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..3).all(|k| self.min[k] <= p[k] && p[k] <= self.max[k])
    }

    /// Bounding box of an arbitrary point iterator; `None` when empty.
    pub fn of_points<I: IntoIterator<Item = Point>>(points: I) -> Option<Aabb> {
        let mut it = points.into_iter();
        let mut bb = Aabb::of_point(it.next()?);
        for p in it {
            bb.include(p);
        }
        Some(bb)
    }
}

/// Componentwise min/max over the cloud.
pub fn bounds(cloud: &PointCloud) -> Result<Aabb, CloudError> {
    Aabb::of_points(cloud.points().iter().copied()).ok_or(CloudError::EmptyCloud)
}

/// Ordered frames sharing one bit depth.
#[derive(Debug, Clone)]
pub struct Sequence {
    frames: Vec<PointCloud>,
    frame_rate: f64,
}

impl Sequence {
    pub fn new(frames: Vec<PointCloud>, frame_rate: f64) -> Result<Self, CloudError> {
        if !(frame_rate > 0.0 && frame_rate.is_finite()) {
            return Err(CloudError::BadFrameRate);
        }
        if let Some(first) = frames.first() {
            if let Some(f) = frames.iter().find(|f| f.bit_depth() != first.bit_depth()) {
                return Err(CloudError::MixedBitDepth(first.bit_depth(), f.bit_depth()));
            }
        }
        Ok(Sequence { frames, frame_rate })
    }

    pub fn frames(&self) -> &[PointCloud] {
        &self.frames
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn into_frames(self) -> Vec<PointCloud> {
        self.frames
    }
}
