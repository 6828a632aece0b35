//! Deterministic synthetic fixtures: elliptic cylinder shells, stacked
//! cylinders and translating sequences.
//!
//! Shells are sampled so that every column seen along ±Z holds at most two
//! points: for each integer `x` offset across the ellipse the two arc points
//! `z = ±round(b·sqrt(1 - x²/a²))` are emitted (one point where they meet).

use crate::cloud::{Color, Point, PointCloud, DEFAULT_BIT_DEPTH};

/// Points of one ring at height `y`, centered at `(cu, cw)` in the XZ plane,
/// with semi-axes `au` along X and `aw` along Z.
pub fn ellipse_ring(cu: u32, cw: u32, au: u32, aw: u32, y: u32) -> Vec<Point> {
    let mut out = Vec::with_capacity(4 * au as usize + 2);
    let a = au as f64;
    for dx in -(au as i64)..=(au as i64) {
        let t = 1.0 - (dx * dx) as f64 / (a * a);
        let dz = (aw as f64 * t.max(0.0).sqrt()).round() as i64;
        let x = (cu as i64 + dx) as u32;
        out.push([x, y, (cw as i64 - dz) as u32]);
        if dz != 0 {
            out.push([x, y, (cw as i64 + dz) as u32]);
        }
    }
    out
}

/// Color attached to a point given its offset from the object's anchor, so a
/// rigidly moving object keeps its colors. A smooth ramp plus deterministic
/// per-point noise of up to ±12 levels, like sensor noise in captured data.
pub fn local_color(offset: [i64; 3]) -> Color {
    let [x, y, z] = offset;
    let base = [128 + 2 * x + y, 64 + 3 * y, 32 + x + 2 * z];
    let mut h = (x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (y as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f)
        ^ (z as u64).wrapping_mul(0x1656_67b1_9e37_79f9);
    base.map(|b| {
        h ^= h >> 31;
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 29;
        let noise = (h % 25) as i64 - 12;
        (b + noise).rem_euclid(256) as u8
    })
}

/// Upright elliptic cylinder shell along Y.
#[derive(Debug, Clone, Copy)]
pub struct ShellSpec {
    /// Ring center; the Y component is ignored.
    pub center: [u32; 3],
    /// Semi-axis along X.
    pub a: u32,
    /// Semi-axis along Z.
    pub b: u32,
    pub y0: u32,
    pub height: u32,
}

fn colored(points: Vec<Point>, anchor: [u32; 3], bit_depth: u8) -> PointCloud {
    let colors = points
        .iter()
        .map(|p| local_color([0, 1, 2].map(|k| p[k] as i64 - anchor[k] as i64)))
        .collect();
    PointCloud::new(points, colors, bit_depth).expect("synthetic fixture is valid")
}

pub fn shell_points(spec: &ShellSpec) -> Vec<Point> {
    (spec.y0..spec.y0 + spec.height)
        .flat_map(|y| ellipse_ring(spec.center[0], spec.center[2], spec.a, spec.b, y))
        .collect()
}

pub fn cylinder_shell(spec: &ShellSpec) -> PointCloud {
    let anchor = [spec.center[0], spec.y0, spec.center[2]];
    colored(shell_points(spec), anchor, DEFAULT_BIT_DEPTH)
}

/// The 10,000-point elliptic cylinder (semi-axes 25 × 15, 100 slabs tall)
/// used by the round-trip and segmentation checks.
pub fn elliptic_cylinder_10k() -> PointCloud {
    cylinder_shell(&ShellSpec { center: [512, 0, 512], a: 25, b: 15, y0: 100, height: 100 })
}

/// Two coaxial circular shells stacked along Y: a narrow one below a wide one.
#[derive(Debug, Clone, Copy)]
pub struct StackSpec {
    pub center: [u32; 3],
    pub lower_radius: u32,
    pub upper_radius: u32,
    pub y0: u32,
    pub lower_height: u32,
    pub upper_height: u32,
}

impl Default for StackSpec {
    fn default() -> Self {
        StackSpec {
            center: [512, 0, 512],
            lower_radius: 10,
            upper_radius: 30,
            y0: 100,
            lower_height: 50,
            upper_height: 50,
        }
    }
}

pub fn stacked_cylinders(spec: &StackSpec) -> PointCloud {
    let (cx, cz) = (spec.center[0], spec.center[2]);
    let step = spec.y0 + spec.lower_height;
    let mut pts: Vec<Point> = (spec.y0..step)
        .flat_map(|y| ellipse_ring(cx, cz, spec.lower_radius, spec.lower_radius, y))
        .collect();
    pts.extend((step..step + spec.upper_height).flat_map(|y| ellipse_ring(cx, cz, spec.upper_radius, spec.upper_radius, y)));
    colored(pts, [cx, spec.y0, cz], DEFAULT_BIT_DEPTH)
}

/// `frames` copies of a shell, translated by `step` voxels per frame.
pub fn translating_sequence(spec: &ShellSpec, frames: usize, step: [i32; 3]) -> Vec<PointCloud> {
    (0..frames as i64)
        .map(|f| {
            let shift = step.map(|s| s as i64 * f);
            let moved = ShellSpec {
                center: [0, 1, 2].map(|k| (spec.center[k] as i64 + shift[k]) as u32),
                y0: (spec.y0 as i64 + shift[1]) as u32,
                ..*spec
            };
            cylinder_shell(&moved)
        })
        .collect()
}

/// One-million-point shell (semi-axes 250 × 200, 1000 slabs) for scale tests.
pub fn million_point_shell() -> PointCloud {
    cylinder_shell(&ShellSpec { center: [512, 0, 512], a: 250, b: 200, y0: 12, height: 1000 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_has_exact_half_extents() {
        let r = ellipse_ring(100, 100, 25, 15, 0);
        assert_eq!(r.len(), 100);
        let xs: Vec<u32> = r.iter().map(|p| p[0]).collect();
        let zs: Vec<u32> = r.iter().map(|p| p[2]).collect();
        assert_eq!((*xs.iter().min().unwrap(), *xs.iter().max().unwrap()), (75, 125));
        assert_eq!((*zs.iter().min().unwrap(), *zs.iter().max().unwrap()), (85, 115));
    }

    #[test]
    fn fixture_sizes() {
        assert_eq!(elliptic_cylinder_10k().len(), 10_000);
        let s = stacked_cylinders(&StackSpec::default());
        assert_eq!(s.len(), 50 * 40 + 50 * 120);
    }

    #[test]
    fn translation_preserves_colors() {
        let spec = ShellSpec { center: [100, 0, 100], a: 5, b: 4, y0: 10, height: 3 };
        let seq = translating_sequence(&spec, 2, [3, 0, 0]);
        assert_eq!(seq[0].colors(), seq[1].colors());
        assert_eq!(seq[1].points()[0][0], seq[0].points()[0][0] + 3);
    }
}
