//! Cross-sectional point cloud codec.
//!
//! Frames are cut into slabs along one axis, grouped into sections that each
//! hold a single elliptic-cylinder-like surface, projected onto two depth
//! layers, packed into an atlas and coded with a small predictive
//! DEFLATE-based bitstream. The decoder lifts the maps back to 3D and merges
//! the sections.

pub mod atlas;
pub mod axis;
pub mod cloud;
pub mod codec;
pub mod config;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod ply;
pub mod projection;
pub mod reconstruct;
pub mod section;
pub mod synth;

pub use atlas::{pack, unpack, Atlas, AtlasError, MapDims, Placement};
pub use axis::{Axis, SignedAxis};
pub use cloud::{Aabb, CloudError, Color, Point, PointCloud, Sequence, DEFAULT_BIT_DEPTH};
pub use codec::{decode_sequence, encode_sequence, Bitstream, CodecError, CodecParams, FrameData, SectionRecord};
pub use config::{ConfigError, PipelineConfig};
pub use metrics::{bd_psnr, bd_rate, color_psnr, geometry_psnr_d1, temporal_mad, MetricsError, RdCurve, RdPoint};
pub use pipeline::{decode_clouds, encode_clouds, PipelineError};
pub use ply::{load_ply, save_ply, PlyError};
pub use projection::{MapSet, ProjectionError};
pub use reconstruct::{merge_sections, unproject, ReconstructError};
pub use section::{segment, CrossSection, SectionMode, SegmentError, SegmentationConfig};
