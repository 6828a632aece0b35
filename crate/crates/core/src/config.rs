//! `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `auto` | `true` selects automatic sectioning |
//! | `sections` | fixed section count K (conflicts with `auto = true`) |
//! | `ellipse_tolerance` | ring membership slack in voxels |
//! | `overlap_width` | slabs shared by neighbouring sections |
//! | `surface_thickness` | depth gap that separates two layers |
//! | `main_view` | preferred projection plane, e.g. `+Z` |
//! | `subdivide_parts` | split lossy sections into this many bands (0 = off) |
//! | `geometry_qstep`, `attribute_qstep`, `inter_period`, `compressor_level` | codec |
//! | `atlas_width`, `alignment` | packing |
//! | `reuse_layout` | keep atlas placements across frames when possible |
//! | `dedup_radius` | decoder merge radius (default 0 lossless, 1 lossy) |
//! | `bit_depth`, `frame_rate` | input description |

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::atlas::{DEFAULT_ALIGNMENT, DEFAULT_ATLAS_WIDTH};
use crate::axis::SignedAxis;
use crate::cloud::DEFAULT_BIT_DEPTH;
use crate::codec::CodecParams;
use crate::section::{SectionMode, SegmentationConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("conflicting settings: {0}")]
    Conflict(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub segmentation: SegmentationConfig,
    pub codec: CodecParams,
    pub subdivide_parts: usize,
    pub atlas_width: u32,
    pub alignment: u32,
    pub reuse_layout: bool,
    /// `None` picks 0 for lossless streams and 1 otherwise.
    pub dedup_radius: Option<u32>,
    pub bit_depth: u8,
    pub frame_rate: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            segmentation: SegmentationConfig::default(),
            codec: CodecParams::default(),
            subdivide_parts: 0,
            atlas_width: DEFAULT_ATLAS_WIDTH,
            alignment: DEFAULT_ALIGNMENT,
            reuse_layout: false,
            dedup_radius: None,
            bit_depth: DEFAULT_BIT_DEPTH,
            frame_rate: 30.0,
        }
    }
}

pub const KEYS: &[&str] = &[
    "auto",
    "sections",
    "ellipse_tolerance",
    "overlap_width",
    "surface_thickness",
    "main_view",
    "subdivide_parts",
    "geometry_qstep",
    "attribute_qstep",
    "inter_period",
    "compressor_level",
    "atlas_width",
    "alignment",
    "reuse_layout",
    "dedup_radius",
    "bit_depth",
    "frame_rate",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn positive(key: &str, value: &str) -> Result<u32, ConfigError> {
    let v: u32 = parse(key, value)?;
    if v == 0 {
        return Err(ConfigError::BadValue { key: key.into(), value: value.into(), reason: "must be at least 1".into() });
    }
    Ok(v)
}

impl PipelineConfig {
    /// Sets one key. Unknown keys yield `UnknownKey` with line 0.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let seg = &mut self.segmentation;
        match key {
            "auto" => {
                if parse::<bool>(key, value)? {
                    seg.mode = SectionMode::Auto;
                } else if seg.mode == SectionMode::Auto {
                    seg.mode = SectionMode::Manual(1);
                }
            }
            "sections" => seg.mode = SectionMode::Manual(positive(key, value)? as usize),
            "ellipse_tolerance" => {
                let v: f64 = parse(key, value)?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(ConfigError::BadValue { key: key.into(), value: value.into(), reason: "must be a finite non-negative number".into() });
                }
                seg.ellipse_tolerance = v;
            }
            "overlap_width" => seg.overlap_width = parse(key, value)?,
            "surface_thickness" => seg.surface_thickness = parse(key, value)?,
            "main_view" => seg.main_view = parse::<SignedAxis>(key, value)?,
            "subdivide_parts" => self.subdivide_parts = parse(key, value)?,
            "geometry_qstep" => self.codec.geometry_qstep = positive(key, value)?,
            "attribute_qstep" => self.codec.attribute_qstep = positive(key, value)?,
            "inter_period" => self.codec.inter_period = positive(key, value)?,
            "compressor_level" => {
                let v: u32 = parse(key, value)?;
                if v > 9 {
                    return Err(ConfigError::BadValue { key: key.into(), value: value.into(), reason: "must be in 0..=9".into() });
                }
                self.codec.compressor_level = v;
            }
            "atlas_width" => self.atlas_width = positive(key, value)?,
            "alignment" => self.alignment = positive(key, value)?,
            "reuse_layout" => self.reuse_layout = parse(key, value)?,
            "dedup_radius" => self.dedup_radius = Some(parse(key, value)?),
            "bit_depth" => {
                let v: u8 = parse(key, value)?;
                if !(1..=16).contains(&v) {
                    return Err(ConfigError::BadValue { key: key.into(), value: value.into(), reason: "must be in 1..=16".into() });
                }
                self.bit_depth = v;
            }
            "frame_rate" => {
                let v: f64 = parse(key, value)?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(ConfigError::BadValue { key: key.into(), value: value.into(), reason: "must be positive".into() });
                }
                self.frame_rate = v;
            }
            _ => return Err(ConfigError::UnknownKey { line: 0, key: key.into() }),
        }
        Ok(())
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = PipelineConfig::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies a config file body on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen: Vec<&str> = Vec::new();
        let mut auto_on = false;
        let mut sections_given = false;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Syntax { line, text: body.into() });
            };
            let key = k.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line, text: body.into() });
            }
            let Some(&canonical) = KEYS.iter().find(|&&c| c == key) else {
                return Err(ConfigError::UnknownKey { line, key: key.into() });
            };
            if seen.contains(&canonical) {
                return Err(ConfigError::DuplicateKey { line, key: key.into() });
            }
            seen.push(canonical);
            match canonical {
                "auto" => auto_on = parse::<bool>(key, v.trim())?,
                "sections" => sections_given = true,
                _ => {}
            }
            self.set(canonical, v)?;
        }
        if auto_on && sections_given {
            return Err(ConfigError::Conflict("`auto = true` together with `sections`".into()));
        }
        if auto_on {
            self.segmentation.mode = SectionMode::Auto;
        }
        Ok(())
    }

    /// Candidate projection planes, main view first.
    pub fn candidate_planes(&self) -> Vec<SignedAxis> {
        SignedAxis::candidates_from(self.segmentation.main_view)
    }

    pub fn is_lossless(&self) -> bool {
        self.codec.geometry_qstep == 1 && self.codec.attribute_qstep == 1
    }

    pub fn effective_dedup_radius(&self) -> u32 {
        self.dedup_radius.unwrap_or(if self.is_lossless() { 0 } else { 1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let text = "# comment\n\nsections = 3\nmain_view = -x\ngeometry_qstep=4\nreuse_layout = true\nframe_rate = 25\n";
        let c = PipelineConfig::parse(text).unwrap();
        assert_eq!(c.segmentation.mode, SectionMode::Manual(3));
        assert_eq!(c.segmentation.main_view, SignedAxis::NEG_X);
        assert_eq!(c.codec.geometry_qstep, 4);
        assert!(c.reuse_layout);
        assert_eq!(c.frame_rate, 25.0);
        assert_eq!(c.effective_dedup_radius(), 1);
        assert_eq!(PipelineConfig::default().effective_dedup_radius(), 0);
        assert_eq!(PipelineConfig::default().segmentation.mode, SectionMode::Auto);
    }

    #[test]
    fn every_key_is_accepted() {
        let mut c = PipelineConfig::default();
        let values = ["true", "2", "1.5", "0", "3", "+Y", "2", "2", "2", "4", "9", "512", "8", "false", "1", "12", "60"];
        for (k, v) in KEYS.iter().zip(values) {
            c.set(k, v).unwrap_or_else(|e| panic!("{k}: {e}"));
        }
        assert_eq!(c.bit_depth, 12);
    }

    #[test]
    fn errors() {
        assert!(matches!(PipelineConfig::parse("oops"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(PipelineConfig::parse("\nfoo = 1"), Err(ConfigError::UnknownKey { line: 2, .. })));
        assert!(matches!(PipelineConfig::parse("alignment=1\nalignment=2"), Err(ConfigError::DuplicateKey { line: 2, .. })));
        assert!(matches!(PipelineConfig::parse("geometry_qstep = 0"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(PipelineConfig::parse("main_view = W"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(PipelineConfig::parse("auto = true\nsections = 2"), Err(ConfigError::Conflict(_))));
    }
}
