//! Objective quality measures: point-to-point geometry PSNR, color PSNR,
//! frame-to-frame mean absolute difference, and Bjøntegaard deltas.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::Atlas;
use crate::cloud::{max_coord, Point, PointCloud};

/// Reported instead of +inf when the error is zero.
pub const PSNR_CAP: f64 = 999.99;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("bit depths differ ({0} vs {1})")]
    BitDepthMismatch(u8, u8),
    #[error("frame sizes differ ({0} vs {1} samples)")]
    DimMismatch(usize, usize),
    #[error("curve '{label}' has {got} points, at least 4 needed")]
    InsufficientPoints { label: String, got: usize },
    #[error("curve '{0}' rates must be positive and strictly increasing")]
    BadRates(String),
    #[error("curve '{0}' has a non-finite PSNR")]
    BadPsnr(String),
    #[error("curves do not overlap")]
    NoOverlap,
}

/// PSNR for a mean squared error against a squared peak, capped.
pub fn psnr(mse: f64, peak_squared: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP;
    }
    (10.0 * (peak_squared / mse).log10()).min(PSNR_CAP)
}

/// Exact nearest-neighbour index over integer points, bucketed on a
/// uniform grid. Ties go to the lowest point index.
pub struct NearestIndex<'a> {
    points: &'a [Point],
    cell: i64,
    buckets: HashMap<[i64; 3], Vec<u32>>,
}

impl<'a> NearestIndex<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        let cell = Self::cell_size(points);
        let mut buckets: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key_of(p, cell)).or_default().push(i as u32);
        }
        NearestIndex { points, cell, buckets }
    }

    fn cell_size(points: &[Point]) -> i64 {
        let Some(bb) = crate::cloud::Aabb::of_points(points.iter().copied()) else {
            return 1;
        };
        let vol: f64 = (0..3).map(|k| (bb.max[k] - bb.min[k] + 1) as f64).product();
        (vol / points.len() as f64).cbrt().round().max(1.0) as i64
    }

    fn key_of(p: &Point, cell: i64) -> [i64; 3] {
        p.map(|c| c as i64 / cell)
    }

    /// `(index, squared distance)` of the nearest point; `None` when empty.
    pub fn nearest(&self, q: Point) -> Option<(usize, u64)> {
        if self.points.is_empty() {
            return None;
        }
        let k = Self::key_of(&q, self.cell);
        let mut best: Option<(u64, u32)> = None;
        let mut remaining = self.buckets.len();
        for r in 0i64.. {
            if r > 0 {
                // every point in ring r differs by at least (r-1)*cell+1 on some axis
                let gap = ((r - 1) * self.cell + 1) as u64;
                if best.is_some_and(|(d, _)| gap * gap > d) || remaining == 0 {
                    break;
                }
                // sparse neighbourhood: walking empty rings would cost more than a scan
                let side = (2 * r + 1) as u64;
                if side * side * side > 8 * self.buckets.len() as u64 {
                    return self.scan(q);
                }
            }
            for dx in -r..=r {
                for dy in -r..=r {
                    let on_face = dx.abs() == r || dy.abs() == r;
                    let dzs: Box<dyn Iterator<Item = i64>> =
                        if on_face { Box::new(-r..=r) } else { Box::new([-r, r].into_iter()) };
                    for dz in dzs {
                        if r == 0 && dz != 0 {
                            continue;
                        }
                        let Some(bucket) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                            continue;
                        };
                        remaining -= 1;
                        for &i in bucket {
                            let d = dist2(q, self.points[i as usize]);
                            if best.is_none_or(|b| (d, i) < b) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(d, i)| (i as usize, d))
    }

    fn scan(&self, q: Point) -> Option<(usize, u64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, &p)| (dist2(q, p), i))
            .min()
            .map(|(d, i)| (i, d))
    }
}

#[inline]
pub fn dist2(a: Point, b: Point) -> u64 {
    (0..3).map(|k| (a[k] as i64 - b[k] as i64).pow(2) as u64).sum()
}

fn check_pair(a: &PointCloud, b: &PointCloud) -> Result<(), MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    if a.bit_depth() != b.bit_depth() {
        return Err(MetricsError::BitDepthMismatch(a.bit_depth(), b.bit_depth()));
    }
    Ok(())
}

/// Nearest neighbour in `to` of every point of `from`.
fn nearest_all(from: &PointCloud, to: &PointCloud) -> Vec<(usize, u64)> {
    let index = NearestIndex::new(to.points());
    from.points().par_iter().map(|&p| index.nearest(p).expect("non-empty")).collect()
}

/// One-directional mean squared nearest-neighbour distance.
pub fn mse_point_to_point(from: &PointCloud, to: &PointCloud) -> Result<f64, MetricsError> {
    check_pair(from, to)?;
    let sum: u64 = nearest_all(from, to).iter().map(|&(_, d)| d).sum();
    Ok(sum as f64 / from.len() as f64)
}

/// Symmetric D1 PSNR with peak `3·(2^bit_depth - 1)^2`.
pub fn geometry_psnr_d1(reference: &PointCloud, degraded: &PointCloud) -> Result<f64, MetricsError> {
    let mse = mse_point_to_point(reference, degraded)?.max(mse_point_to_point(degraded, reference)?);
    let p = max_coord(reference.bit_depth()) as f64;
    Ok(psnr(mse, 3.0 * p * p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorPsnr {
    pub per_channel: [f64; 3],
    pub average: f64,
}

fn color_mse(from: &PointCloud, to: &PointCloud) -> [f64; 3] {
    let nn = nearest_all(from, to);
    let mut sums = [0u64; 3];
    for (ca, &(j, _)) in from.colors().iter().zip(&nn) {
        let cb = to.colors()[j];
        for k in 0..3 {
            sums[k] += (ca[k] as i64 - cb[k] as i64).pow(2) as u64;
        }
    }
    sums.map(|s| s as f64 / from.len() as f64)
}

/// Per-channel color PSNR through nearest-neighbour correspondence, the
/// worse of both directions per channel, and the mean of the three.
pub fn color_psnr(reference: &PointCloud, degraded: &PointCloud) -> Result<ColorPsnr, MetricsError> {
    check_pair(reference, degraded)?;
    let ab = color_mse(reference, degraded);
    let ba = color_mse(degraded, reference);
    let per_channel = [0, 1, 2].map(|k| psnr(ab[k].max(ba[k]), 255.0 * 255.0));
    Ok(ColorPsnr { per_channel, average: (per_channel.iter().sum::<f64>() / 3.0).min(PSNR_CAP) })
}

/// Mean absolute sample difference between two equally sized frames.
pub fn temporal_mad(a: &[u8], b: &[u8]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::DimMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: u64 = a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum();
    Ok(sum as f64 / a.len() as f64)
}

/// [`temporal_mad`] over the near-layer attribute planes of two atlases.
/// Atlases of different sizes are compared on the union canvas, missing
/// pixels counting as black.
pub fn attribute_mad(a: &Atlas, b: &Atlas) -> f64 {
    let (w, h) = (a.width.max(b.width) as usize, a.height.max(b.height) as usize);
    let canvas = |at: &Atlas| -> Vec<u8> {
        let mut out = vec![0u8; w * h * 3];
        for y in 0..at.height as usize {
            for x in 0..at.width as usize {
                let c = at.attribute_a0[y * at.width as usize + x];
                out[(y * w + x) * 3..][..3].copy_from_slice(&c);
            }
        }
        out
    };
    temporal_mad(&canvas(a), &canvas(b)).expect("same canvas size")
}

// ---------------------------------------------------------------------------
// Bjøntegaard deltas

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    /// Bits per second (or per point; both curves must agree).
    pub rate: f64,
    pub psnr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    pub label: String,
    points: Vec<RdPoint>,
}

impl RdCurve {
    /// Sorts by rate and validates.
    pub fn new(label: impl Into<String>, mut points: Vec<RdPoint>) -> Result<Self, MetricsError> {
        let label = label.into();
        if points.len() < 4 {
            return Err(MetricsError::InsufficientPoints { label, got: points.len() });
        }
        points.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        if points.iter().any(|p| !(p.rate > 0.0) || !p.rate.is_finite()) || points.windows(2).any(|w| w[1].rate <= w[0].rate) {
            return Err(MetricsError::BadRates(label));
        }
        if points.iter().any(|p| !p.psnr.is_finite()) {
            return Err(MetricsError::BadPsnr(label));
        }
        Ok(RdCurve { label, points })
    }

    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }
}

/// Least-squares cubic in a normalized variable `t = (x - shift) / scale`.
struct Cubic {
    coef: [f64; 4],
    shift: f64,
    scale: f64,
}

impl Cubic {
    fn fit(xs: &[f64], ys: &[f64]) -> Cubic {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = 0.5 * (lo + hi);
        let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
        let n = xs.len();
        let a = DMatrix::from_fn(n, 4, |r, c| ((xs[r] - shift) / scale).powi(c as i32));
        let b = DVector::from_column_slice(ys);
        let sol = a.svd(true, true).solve(&b, 1e-12).expect("SVD with both factors");
        Cubic { coef: [sol[0], sol[1], sol[2], sol[3]], shift, scale }
    }

    /// Exact integral over `[x0, x1]`.
    fn integral(&self, x0: f64, x1: f64) -> f64 {
        let anti = |x: f64| {
            let t = (x - self.shift) / self.scale;
            self.coef.iter().enumerate().map(|(k, c)| c * t.powi(k as i32 + 1) / (k as f64 + 1.0)).sum::<f64>()
        };
        self.scale * (anti(x1) - anti(x0))
    }
}

fn overlap(a: &[f64], b: &[f64]) -> Result<(f64, f64), MetricsError> {
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = min(a).max(min(b));
    let hi = max(a).min(max(b));
    if hi > lo {
        Ok((lo, hi))
    } else {
        Err(MetricsError::NoOverlap)
    }
}

/// Average rate difference at equal quality, in percent. Negative means the
/// test curve needs fewer bits.
pub fn bd_rate(anchor: &RdCurve, test: &RdCurve) -> Result<f64, MetricsError> {
    let split = |c: &RdCurve| -> (Vec<f64>, Vec<f64>) {
        c.points.iter().map(|p| (p.psnr, p.rate.log10())).unzip()
    };
    let (qa, ra) = split(anchor);
    let (qt, rt) = split(test);
    let (lo, hi) = overlap(&qa, &qt)?;
    let fa = Cubic::fit(&qa, &ra);
    let ft = Cubic::fit(&qt, &rt);
    let avg = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
    Ok((10f64.powf(avg) - 1.0) * 100.0)
}

/// Average PSNR difference at equal rate, in dB.
pub fn bd_psnr(anchor: &RdCurve, test: &RdCurve) -> Result<f64, MetricsError> {
    let split = |c: &RdCurve| -> (Vec<f64>, Vec<f64>) {
        c.points.iter().map(|p| (p.rate.log10(), p.psnr)).unzip()
    };
    let (ra, qa) = split(anchor);
    let (rt, qt) = split(test);
    let (lo, hi) = overlap(&ra, &rt)?;
    let fa = Cubic::fit(&ra, &qa);
    let ft = Cubic::fit(&rt, &qt);
    Ok((ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: Vec<Point>, colors: Vec<[u8; 3]>) -> PointCloud {
        PointCloud::new(points, colors, 10).unwrap()
    }

    fn brute_nearest(points: &[Point], q: Point) -> (usize, u64) {
        let mut best = (0, u64::MAX);
        for (i, &p) in points.iter().enumerate() {
            let d = dist2(q, p);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize, span: u32) -> PointCloud {
        let pts: Vec<Point> = (0..n).map(|_| [0; 3].map(|_: u32| rng.gen_range(0..span))).collect();
        let cols = (0..n).map(|_| rng.gen()).collect();
        PointCloud::dedup(pts, cols, 10).unwrap().0
    }

    #[test]
    fn identical_is_capped() {
        let c = cloud(vec![[0, 0, 0], [3, 4, 5]], vec![[1, 2, 3], [4, 5, 6]]);
        assert_eq!(geometry_psnr_d1(&c, &c).unwrap(), PSNR_CAP);
        assert_eq!(color_psnr(&c, &c).unwrap().average, PSNR_CAP);
    }

    #[test]
    fn unit_offset_psnr() {
        let a = cloud(vec![[0, 0, 0]], vec![[0; 3]]);
        let b = cloud(vec![[1, 0, 0]], vec![[0; 3]]);
        let want = 10.0 * (3.0f64 * 1023.0 * 1023.0).log10();
        assert!((geometry_psnr_d1(&a, &b).unwrap() - want).abs() < 1e-12);
        assert!((want - 64.97).abs() < 0.005);
    }

    #[test]
    fn red_channel_psnr() {
        let a = cloud(vec![[0, 0, 0]], vec![[100, 0, 0]]);
        let b = cloud(vec![[0, 0, 0]], vec![[110, 0, 0]]);
        let c = color_psnr(&a, &b).unwrap();
        assert!((c.per_channel[0] - 10.0 * (65025.0f64 / 100.0).log10()).abs() < 1e-12);
        assert!((c.per_channel[0] - 28.13).abs() < 0.005);
        assert_eq!(c.per_channel[1], PSNR_CAP);
    }

    #[test]
    fn errors() {
        let a = cloud(vec![[0, 0, 0]], vec![[0; 3]]);
        let e = PointCloud::empty(10);
        assert_eq!(geometry_psnr_d1(&a, &e), Err(MetricsError::EmptyCloud));
        let b = PointCloud::new(vec![[0, 0, 0]], vec![[0; 3]], 8).unwrap();
        assert_eq!(color_psnr(&a, &b), Err(MetricsError::BitDepthMismatch(10, 8)));
        assert_eq!(temporal_mad(&[1], &[1, 2]), Err(MetricsError::DimMismatch(1, 2)));
    }

    #[test]
    fn mad_examples() {
        assert_eq!(temporal_mad(&[4; 16], &[4; 16]).unwrap(), 0.0);
        assert_eq!(temporal_mad(&[5; 16], &[8; 16]).unwrap(), 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<u8> = (0..500).map(|_| rng.gen()).collect();
        let b: Vec<u8> = (0..500).map(|_| rng.gen()).collect();
        let brute = a.iter().zip(&b).map(|(&x, &y)| (x as f64 - y as f64).abs()).sum::<f64>() / 500.0;
        assert!((temporal_mad(&a, &b).unwrap() - brute).abs() < 1e-12);
        assert_eq!(temporal_mad(&a, &b).unwrap(), temporal_mad(&b, &a).unwrap());
    }

    #[test]
    fn attribute_mad_pads_smaller_atlas() {
        let mut a = Atlas::blank(2, 1);
        a.attribute_a0[0] = [9, 9, 9];
        let mut b = Atlas::blank(2, 2);
        b.attribute_a0[3] = [3, 3, 3];
        assert_eq!(attribute_mad(&a, &b), (27.0 + 9.0) / 12.0);
    }

    #[test]
    fn d1_is_symmetric_and_decreases_with_distance() {
        let base: Vec<Point> = (0..50).map(|i| [i * 2, 10, 10]).collect();
        let reference = cloud(base.clone(), vec![[0; 3]; 50]);
        let mut last = f64::INFINITY;
        for shift in 1..6 {
            let moved = cloud(base.iter().map(|p| [p[0], p[1] + shift, p[2]]).collect(), vec![[0; 3]; 50]);
            let v = geometry_psnr_d1(&reference, &moved).unwrap();
            assert_eq!(v, geometry_psnr_d1(&moved, &reference).unwrap());
            assert!(v < last);
            last = v;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn grid_matches_brute_force(seed in any::<u64>(), n in 1usize..120, m in 1usize..120, span in 2u32..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_cloud(&mut rng, n, span);
            let b = random_cloud(&mut rng, m, span);
            let index = NearestIndex::new(b.points());
            for &q in a.points() {
                prop_assert_eq!(index.nearest(q).unwrap(), brute_nearest(b.points(), q));
            }
            let brute_ab = a.points().iter().map(|&q| brute_nearest(b.points(), q).1).sum::<u64>() as f64 / a.len() as f64;
            let brute_ba = b.points().iter().map(|&q| brute_nearest(a.points(), q).1).sum::<u64>() as f64 / b.len() as f64;
            let p = 1023.0f64;
            prop_assert_eq!(geometry_psnr_d1(&a, &b).unwrap(), psnr(brute_ab.max(brute_ba), 3.0 * p * p));

            let brute_color = |x: &PointCloud, y: &PointCloud| -> [f64; 3] {
                let mut s = [0f64; 3];
                for (q, c) in x.iter() {
                    let j = brute_nearest(y.points(), *q).0;
                    for k in 0..3 { s[k] += (c[k] as f64 - y.colors()[j][k] as f64).powi(2); }
                }
                s.map(|v| v / x.len() as f64)
            };
            let (ab, ba) = (brute_color(&a, &b), brute_color(&b, &a));
            let c = color_psnr(&a, &b).unwrap();
            for k in 0..3 {
                prop_assert_eq!(c.per_channel[k], psnr(ab[k].max(ba[k]), 65025.0));
            }
        }
    }

    // -- BD oracle: piecewise-linear interpolation, 10,000-sample trapezoid

    fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
        for w in idx.windows(2) {
            let (i, j) = (w[0], w[1]);
            if x <= xs[j] {
                return ys[i] + (ys[j] - ys[i]) * (x - xs[i]) / (xs[j] - xs[i]);
            }
        }
        ys[*idx.last().unwrap()]
    }

    fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let n = 10_000;
        let h = (hi - lo) / n as f64;
        (0..=n).map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * f(lo + i as f64 * h)
        }).sum::<f64>() * h
    }

    fn oracle_bd_rate(a: &RdCurve, t: &RdCurve) -> f64 {
        let (qa, ra): (Vec<f64>, Vec<f64>) = a.points().iter().map(|p| (p.psnr, p.rate.log10())).unzip();
        let (qt, rt): (Vec<f64>, Vec<f64>) = t.points().iter().map(|p| (p.psnr, p.rate.log10())).unzip();
        let (lo, hi) = overlap(&qa, &qt).unwrap();
        let d = trapezoid(|q| interp(&qt, &rt, q) - interp(&qa, &ra, q), lo, hi) / (hi - lo);
        (10f64.powf(d) - 1.0) * 100.0
    }

    fn oracle_bd_psnr(a: &RdCurve, t: &RdCurve) -> f64 {
        let (ra, qa): (Vec<f64>, Vec<f64>) = a.points().iter().map(|p| (p.rate.log10(), p.psnr)).unzip();
        let (rt, qt): (Vec<f64>, Vec<f64>) = t.points().iter().map(|p| (p.rate.log10(), p.psnr)).unzip();
        let (lo, hi) = overlap(&ra, &rt).unwrap();
        trapezoid(|r| interp(&rt, &qt, r) - interp(&ra, &qa, r), lo, hi) / (hi - lo)
    }

    fn curve(label: &str, pts: &[(f64, f64)]) -> RdCurve {
        RdCurve::new(label, pts.iter().map(|&(rate, psnr)| RdPoint { rate, psnr }).collect()).unwrap()
    }

    fn anchor() -> RdCurve {
        curve("anchor", &[(1e5, 30.0), (2e5, 33.5), (4e5, 36.4), (8e5, 38.9), (1.6e6, 41.0)])
    }

    #[test]
    fn bd_identity() {
        let a = anchor();
        assert!(bd_rate(&a, &a).unwrap().abs() < 1e-9);
        assert!(bd_psnr(&a, &a).unwrap().abs() < 1e-9);
    }

    #[test]
    fn doubled_rates_cost_one_hundred_percent() {
        let a = anchor();
        let t = curve("t", &a.points().iter().map(|p| (2.0 * p.rate, p.psnr)).collect::<Vec<_>>());
        assert!((bd_rate(&a, &t).unwrap() - 100.0).abs() < 1e-6);
        assert!((oracle_bd_rate(&a, &t) - 100.0).abs() < 1e-6);
    }

    #[test]
    fn scaled_rates_match_scale() {
        let a = anchor();
        for s in [0.5, 0.77, 0.9] {
            let t = curve("t", &a.points().iter().map(|p| (s * p.rate, p.psnr)).collect::<Vec<_>>());
            assert!((bd_rate(&a, &t).unwrap() - (s - 1.0) * 100.0).abs() < 0.1);
        }
    }

    #[test]
    fn psnr_offset_is_one_db() {
        let a = anchor();
        let t = curve("t", &a.points().iter().map(|p| (p.rate, p.psnr + 1.0)).collect::<Vec<_>>());
        assert!((bd_psnr(&a, &t).unwrap() - 1.0).abs() < 1e-9);
        assert!((oracle_bd_psnr(&a, &t) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn curve_validation() {
        let few = vec![RdPoint { rate: 1.0, psnr: 30.0 }; 3];
        assert!(matches!(RdCurve::new("x", few), Err(MetricsError::InsufficientPoints { got: 3, .. })));
        let dup = vec![RdPoint { rate: 1.0, psnr: 30.0 }; 4];
        assert!(matches!(RdCurve::new("x", dup), Err(MetricsError::BadRates(_))));
        let a = anchor();
        let far = curve("far", &[(1e9, 60.0), (2e9, 61.0), (3e9, 62.0), (4e9, 63.0)]);
        assert_eq!(bd_rate(&a, &far), Err(MetricsError::NoOverlap));
        assert_eq!(bd_psnr(&a, &far), Err(MetricsError::NoOverlap));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn cubic_fit_tracks_numeric_oracle(
            q0 in 25.0f64..35.0,
            slope in 6.0f64..12.0,
            bend in 0.0f64..0.6,
            shift in -0.15f64..0.15,
            dq in -0.8f64..0.8,
        ) {
            // concave, nearly linear curves in log-rate: psnr = q0 + slope*x - bend*x^2
            let make = |s: f64, off: f64| -> RdCurve {
                let pts: Vec<(f64, f64)> = (0..6).map(|i| {
                    let x = 5.0 + 0.3 * i as f64;
                    let lx = x - 5.0;
                    (10f64.powf(x + s), q0 + slope * lx - bend * lx * lx + off)
                }).collect();
                curve("c", &pts)
            };
            let a = make(0.0, 0.0);
            let t = make(shift, dq);
            let (r, ro) = (bd_rate(&a, &t).unwrap(), oracle_bd_rate(&a, &t));
            prop_assert!((r - ro).abs() <= 0.5, "bd_rate {r} vs oracle {ro}");
            let (p, po) = (bd_psnr(&a, &t).unwrap(), oracle_bd_psnr(&a, &t));
            prop_assert!((p - po).abs() <= (0.005 * po.abs()).max(0.005), "bd_psnr {p} vs oracle {po}");
        }
    }
}
