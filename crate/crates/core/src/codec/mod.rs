//! Atlas sequence bitstream.
//!
//! Layout:
//!
//! ```text
//! "XPCC" | u8 version | u32 LE header length | LEB128 frame count
//! | params | u8 bit depth | per-frame metadata ...        (header region)
//! u32 LE CRC-32 of the header region
//! per frame, per channel (OCC, D0, D1, A0, A1): LEB128 length | DEFLATE block
//! ```
//!
//! Occupancy is run-length coded before DEFLATE. Depth and color channels
//! are quantized; intra frames code spatial prediction residuals, inter
//! frames code differences from the previous frame's levels. Only occupied
//! pixels contribute symbols, in row-major order (colors interleave R, G, B).

mod predict;
mod quant;
mod rle;
mod varint;

use std::io::{Read, Write};

use flate2::{read::DeflateDecoder, write::DeflateEncoder, Compression};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::{Atlas, MapDims, Placement};
use crate::axis::{Axis, SignedAxis};
use crate::cloud::max_coord;
use crate::section::{Band, EllipseParams, SlabRange};

pub use predict::{predict_residual, reconstruct_from_residual};
pub use quant::{dequantize, dequantize_clamped, quantize};
pub use rle::{rle_decode, rle_encode, run_count, RleError};
pub use varint::{read_uleb, unzigzag, write_uleb, zigzag};

pub const MAGIC: [u8; 4] = *b"XPCC";
pub const VERSION: u8 = 1;

/// Guard against absurd allocations from hostile headers.
const MAX_AREA: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("stream does not start with the XPCC magic")]
    BadMagic,
    #[error("unsupported stream version {0}")]
    UnsupportedVersion(u8),
    #[error("header CRC mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    CrcMismatch { stored: u32, computed: u32 },
    #[error("occupancy runs are corrupt: {0}")]
    CorruptRuns(#[from] RleError),
    #[error("stream ends before the payload is complete")]
    TruncatedPayload,
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),
    #[error("invalid codec parameters: {0}")]
    InvalidParams(String),
    #[error("inconsistent frame {frame}: {reason}")]
    InconsistentFrame { frame: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecParams {
    pub geometry_qstep: u32,
    pub attribute_qstep: u32,
    pub inter_period: u32,
    /// DEFLATE level, 0..=9.
    pub compressor_level: u32,
}

impl Default for CodecParams {
    fn default() -> Self {
        CodecParams { geometry_qstep: 1, attribute_qstep: 1, inter_period: 1, compressor_level: 6 }
    }
}

impl CodecParams {
    pub fn lossless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if self.geometry_qstep == 0 || self.attribute_qstep == 0 {
            return Err(CodecError::InvalidParams("qsteps must be at least 1".into()));
        }
        if self.inter_period == 0 {
            return Err(CodecError::InvalidParams("inter_period must be at least 1".into()));
        }
        if self.compressor_level > 9 {
            return Err(CodecError::InvalidParams(format!(
                "compressor_level {} outside 0..=9",
                self.compressor_level
            )));
        }
        Ok(())
    }
}

/// Channels in stream order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Occupancy,
    D0,
    D1,
    A0,
    A1,
}

impl Channel {
    pub const ALL: [Channel; 5] = [Channel::Occupancy, Channel::D0, Channel::D1, Channel::A0, Channel::A1];

    pub fn is_geometry(self) -> bool {
        matches!(self, Channel::Occupancy | Channel::D0 | Channel::D1)
    }
}

/// Per-section metadata carried in the header: everything the decoder needs
/// to cut maps out of the atlas and lift them back to 3D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionRecord {
    pub section_id: u32,
    pub axis: Axis,
    pub slab: SlabRange,
    pub band: Option<Band>,
    pub ellipse: EllipseParams,
    pub overlap_lo: bool,
    pub overlap_hi: bool,
    pub plane: SignedAxis,
    pub origin: [u32; 3],
    pub width: u32,
    pub height: u32,
}

impl SectionRecord {
    pub fn dims(&self) -> MapDims {
        MapDims {
            section_id: self.section_id,
            plane: self.plane,
            origin: self.origin,
            width: self.width,
            height: self.height,
        }
    }
}

/// One frame to encode, or one decoded frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameData {
    pub atlas: Atlas,
    /// Same order as `atlas.placements`.
    pub sections: Vec<SectionRecord>,
    /// Point count of the source frame (for bits-per-point).
    pub point_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameStats {
    pub intra: bool,
    /// Compressed block sizes in stream order, without length prefixes.
    pub channel_bytes: [usize; 5],
}

impl FrameStats {
    pub fn geometry_bytes(&self) -> usize {
        Channel::ALL.iter().zip(self.channel_bytes).filter(|(c, _)| c.is_geometry()).map(|(_, b)| b).sum()
    }

    pub fn attribute_bytes(&self) -> usize {
        Channel::ALL.iter().zip(self.channel_bytes).filter(|(c, _)| !c.is_geometry()).map(|(_, b)| b).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StreamStats {
    /// Header region plus CRC.
    pub header_bytes: usize,
    pub frames: Vec<FrameStats>,
}

/// An encoded stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream(pub Vec<u8>);

impl Bitstream {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSequence {
    pub params: CodecParams,
    pub bit_depth: u8,
    pub frames: Vec<FrameData>,
    pub stats: StreamStats,
}

// ---------------------------------------------------------------------------
// encoding

fn is_intra(i: usize, params: &CodecParams, dims: (u32, u32), prev: Option<(u32, u32)>) -> bool {
    i % params.inter_period as usize == 0 || prev != Some(dims)
}

/// Quantized levels of one channel, one plane per component, zero where
/// unoccupied.
type Levels = Vec<Vec<i32>>;

fn channel_levels(atlas: &Atlas, channel: Channel, params: &CodecParams) -> Levels {
    let occ = &atlas.occupancy;
    let gq = params.geometry_qstep;
    let aq = params.attribute_qstep;
    let depth = |d: &[u16]| -> Levels {
        vec![d.iter().zip(occ).map(|(&v, &o)| if o != 0 { quantize(v as u32, gq) as i32 } else { 0 }).collect()]
    };
    let color = |a: &[[u8; 3]]| -> Levels {
        (0..3)
            .map(|k| a.iter().zip(occ).map(|(v, &o)| if o != 0 { quantize(v[k] as u32, aq) as i32 } else { 0 }).collect())
            .collect()
    };
    match channel {
        Channel::Occupancy => Vec::new(),
        Channel::D0 => depth(&atlas.geometry_d0),
        Channel::D1 => depth(&atlas.geometry_d1),
        Channel::A0 => color(&atlas.attribute_a0),
        Channel::A1 => color(&atlas.attribute_a1),
    }
}

/// Serializes the residual symbols of occupied pixels.
fn residual_symbols(levels: &Levels, prev: Option<&Levels>, occ: &[u8], width: usize) -> Vec<u8> {
    let residuals: Vec<Vec<i32>> = match prev {
        None => levels.iter().map(|plane| predict_residual(plane, occ, width)).collect(),
        Some(p) => levels
            .iter()
            .zip(p)
            .map(|(cur, old)| cur.iter().zip(old).zip(occ).map(|((c, o), &m)| if m != 0 { c - o } else { 0 }).collect())
            .collect(),
    };
    let mut out = Vec::new();
    for (i, &o) in occ.iter().enumerate() {
        if o != 0 {
            for plane in &residuals {
                write_uleb(&mut out, zigzag(plane[i] as i64));
            }
        }
    }
    out
}

fn deflate(raw: &[u8], level: u32) -> Vec<u8> {
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::new(level));
    enc.write_all(raw).expect("writing to a Vec cannot fail");
    enc.finish().expect("writing to a Vec cannot fail")
}

fn inflate(block: &[u8]) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    DeflateDecoder::new(block)
        .read_to_end(&mut out)
        .map_err(|e| CodecError::CorruptPayload(format!("DEFLATE block: {e}")))?;
    Ok(out)
}

fn check_frame(i: usize, f: &FrameData) -> Result<(), CodecError> {
    let bad = |reason: String| Err(CodecError::InconsistentFrame { frame: i, reason });
    let a = &f.atlas;
    let area = a.area();
    let lens = [
        a.occupancy.len(),
        a.geometry_d0.len(),
        a.geometry_d1.len(),
        a.attribute_a0.len(),
        a.attribute_a1.len(),
    ];
    if lens.iter().any(|&l| l != area) {
        return bad(format!("channel lengths {lens:?} do not match {}x{}", a.width, a.height));
    }
    if a.placements.len() != f.sections.len() {
        return bad(format!("{} placements for {} sections", a.placements.len(), f.sections.len()));
    }
    for (p, s) in a.placements.iter().zip(&f.sections) {
        if p.section_id != s.section_id || p.width != s.width || p.height != s.height {
            return bad(format!("placement of section {} does not match its record", p.section_id));
        }
    }
    Ok(())
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn write_frame_header(out: &mut Vec<u8>, f: &FrameData, intra: bool) {
    write_uleb(out, f.atlas.width as u64);
    write_uleb(out, f.atlas.height as u64);
    write_uleb(out, f.point_count);
    out.push(intra as u8);
    write_uleb(out, f.sections.len() as u64);
    for s in &f.sections {
        write_uleb(out, s.section_id as u64);
        out.push(s.axis.index() as u8);
        write_uleb(out, s.slab.lo as u64);
        write_uleb(out, s.slab.hi as u64);
        match s.band {
            None => out.push(0),
            Some(b) => {
                out.push(1);
                out.push(b.axis.index() as u8);
                write_uleb(out, b.lo as u64);
                write_uleb(out, b.hi as u64);
            }
        }
        put_f64(out, s.ellipse.center[0]);
        put_f64(out, s.ellipse.center[1]);
        put_f64(out, s.ellipse.a);
        put_f64(out, s.ellipse.b);
        out.push(s.overlap_lo as u8 | (s.overlap_hi as u8) << 1);
        out.push(s.plane.code());
        for c in s.origin {
            write_uleb(out, c as u64);
        }
        write_uleb(out, s.width as u64);
        write_uleb(out, s.height as u64);
    }
    write_uleb(out, f.atlas.placements.len() as u64);
    for p in &f.atlas.placements {
        for v in [p.section_id, p.u, p.v, p.width, p.height] {
            write_uleb(out, v as u64);
        }
        out.push(p.rotated as u8);
    }
}

/// Encodes a sequence and reports per-channel sizes.
pub fn encode_sequence_with_stats(
    frames: &[FrameData],
    params: &CodecParams,
    bit_depth: u8,
) -> Result<(Bitstream, StreamStats), CodecError> {
    params.validate()?;
    if !(1..=16).contains(&bit_depth) {
        return Err(CodecError::InvalidParams(format!("bit depth {bit_depth} outside 1..=16")));
    }
    for (i, f) in frames.iter().enumerate() {
        check_frame(i, f)?;
    }

    let mut intra_flags = Vec::with_capacity(frames.len());
    let mut prev_dims = None;
    for (i, f) in frames.iter().enumerate() {
        let dims = (f.atlas.width, f.atlas.height);
        intra_flags.push(is_intra(i, params, dims, prev_dims));
        prev_dims = Some(dims);
    }

    let mut header = Vec::new();
    header.extend_from_slice(&MAGIC);
    header.push(VERSION);
    header.extend_from_slice(&[0; 4]); // header length, patched below
    write_uleb(&mut header, frames.len() as u64);
    for v in [params.geometry_qstep, params.attribute_qstep, params.inter_period, params.compressor_level] {
        write_uleb(&mut header, v as u64);
    }
    header.push(bit_depth);
    for (f, &intra) in frames.iter().zip(&intra_flags) {
        write_frame_header(&mut header, f, intra);
    }
    let header_len = header.len() as u32;
    header[5..9].copy_from_slice(&header_len.to_le_bytes());
    let crc = crc32fast::hash(&header);

    let mut out = header;
    out.extend_from_slice(&crc.to_le_bytes());
    let mut stats = StreamStats { header_bytes: out.len(), frames: Vec::with_capacity(frames.len()) };

    let mut prev: Option<Vec<Levels>> = None;
    for (f, &intra) in frames.iter().zip(&intra_flags) {
        let a = &f.atlas;
        let width = a.width as usize;
        let levels: Vec<Levels> = Channel::ALL[1..].iter().map(|&c| channel_levels(a, c, params)).collect();
        let mut raws: Vec<Vec<u8>> = Vec::with_capacity(5);
        raws.push(rle_encode(&a.occupancy));
        for (k, lv) in levels.iter().enumerate() {
            let reference = if intra { None } else { prev.as_ref().map(|p| &p[k]) };
            raws.push(residual_symbols(lv, reference, &a.occupancy, width));
        }
        let blocks: Vec<Vec<u8>> = raws.par_iter().map(|r| deflate(r, params.compressor_level)).collect();
        let mut channel_bytes = [0usize; 5];
        for (k, b) in blocks.iter().enumerate() {
            write_uleb(&mut out, b.len() as u64);
            out.extend_from_slice(b);
            channel_bytes[k] = b.len();
        }
        stats.frames.push(FrameStats { intra, channel_bytes });
        prev = Some(levels);
    }
    log::debug!("encoded {} frames into {} bytes", frames.len(), out.len());
    Ok((Bitstream(out), stats))
}

pub fn encode_sequence(frames: &[FrameData], params: &CodecParams, bit_depth: u8) -> Result<Bitstream, CodecError> {
    encode_sequence_with_stats(frames, params, bit_depth).map(|(b, _)| b)
}

// ---------------------------------------------------------------------------
// decoding

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        let b = *self.buf.get(self.pos).ok_or(CodecError::TruncatedPayload)?;
        self.pos += 1;
        Ok(b)
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(CodecError::TruncatedPayload)?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn uleb(&mut self) -> Result<u64, CodecError> {
        if self.pos >= self.buf.len() {
            return Err(CodecError::TruncatedPayload);
        }
        read_uleb(self.buf, &mut self.pos).ok_or(CodecError::TruncatedPayload)
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        let v = self.uleb()?;
        u32::try_from(v).map_err(|_| CodecError::CorruptPayload(format!("value {v} exceeds 32 bits")))
    }

    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().expect("8 bytes")))
    }

    fn axis(&mut self) -> Result<Axis, CodecError> {
        let v = self.u8()?;
        Axis::from_index(v as usize).ok_or_else(|| CodecError::CorruptPayload(format!("axis code {v}")))
    }

    fn at_end(&self) -> bool {
        self.pos == self.buf.len()
    }
}

struct FrameHeader {
    width: u32,
    height: u32,
    point_count: u64,
    intra: bool,
    sections: Vec<SectionRecord>,
    placements: Vec<Placement>,
}

struct StreamHeader {
    params: CodecParams,
    bit_depth: u8,
    frames: Vec<FrameHeader>,
    /// Offset of the first payload byte.
    payload_start: usize,
}

fn corrupt<T>(msg: impl Into<String>) -> Result<T, CodecError> {
    Err(CodecError::CorruptPayload(msg.into()))
}

fn read_frame_header(r: &mut Reader) -> Result<FrameHeader, CodecError> {
    let width = r.u32()?;
    let height = r.u32()?;
    if width as u64 * height as u64 > MAX_AREA {
        return corrupt(format!("atlas {width}x{height} too large"));
    }
    let point_count = r.uleb()?;
    let intra = match r.u8()? {
        0 => false,
        1 => true,
        v => return corrupt(format!("frame type {v}")),
    };
    let n_sections = r.uleb()?;
    let mut sections = Vec::new();
    for _ in 0..n_sections {
        let section_id = r.u32()?;
        let axis = r.axis()?;
        let slab = SlabRange { lo: r.u32()?, hi: r.u32()? };
        let band = match r.u8()? {
            0 => None,
            1 => Some(Band { axis: r.axis()?, lo: r.u32()?, hi: r.u32()? }),
            v => return corrupt(format!("band flag {v}")),
        };
        let ellipse = EllipseParams { center: [r.f64()?, r.f64()?], a: r.f64()?, b: r.f64()? };
        let flags = r.u8()?;
        if flags > 3 {
            return corrupt(format!("overlap flags {flags}"));
        }
        let code = r.u8()?;
        let plane = SignedAxis::from_code(code).ok_or_else(|| CodecError::CorruptPayload(format!("plane code {code}")))?;
        let origin = [r.u32()?, r.u32()?, r.u32()?];
        sections.push(SectionRecord {
            section_id,
            axis,
            slab,
            band,
            ellipse,
            overlap_lo: flags & 1 != 0,
            overlap_hi: flags & 2 != 0,
            plane,
            origin,
            width: r.u32()?,
            height: r.u32()?,
        });
    }
    let n_placements = r.uleb()?;
    let mut placements = Vec::new();
    for _ in 0..n_placements {
        let (section_id, u, v, w, h) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        let rotated = match r.u8()? {
            0 => false,
            1 => true,
            x => return corrupt(format!("rotation flag {x}")),
        };
        placements.push(Placement { section_id, u, v, width: w, height: h, rotated });
    }
    Ok(FrameHeader { width, height, point_count, intra, sections, placements })
}

fn read_header(bytes: &[u8]) -> Result<StreamHeader, CodecError> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(CodecError::BadMagic);
    }
    if bytes.len() < 9 {
        return Err(CodecError::TruncatedPayload);
    }
    let header_len = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    if header_len < 9 || header_len.saturating_add(4) > bytes.len() {
        // a damaged length field cannot locate the CRC; report it as such
        return Err(CodecError::CrcMismatch { stored: 0, computed: crc32fast::hash(&bytes[..bytes.len().min(9)]) });
    }
    let region = &bytes[..header_len];
    let stored = u32::from_le_bytes(bytes[header_len..header_len + 4].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(region);
    if stored != computed {
        return Err(CodecError::CrcMismatch { stored, computed });
    }
    if bytes[4] != VERSION {
        return Err(CodecError::UnsupportedVersion(bytes[4]));
    }

    let mut r = Reader::new(region);
    r.pos = 9;
    let frame_count = r.uleb()?;
    let params = CodecParams {
        geometry_qstep: r.u32()?,
        attribute_qstep: r.u32()?,
        inter_period: r.u32()?,
        compressor_level: r.u32()?,
    };
    params.validate().map_err(|e| CodecError::CorruptPayload(e.to_string()))?;
    let bit_depth = r.u8()?;
    if !(1..=16).contains(&bit_depth) {
        return corrupt(format!("bit depth {bit_depth}"));
    }
    let mut frames = Vec::new();
    for _ in 0..frame_count {
        frames.push(read_frame_header(&mut r)?);
    }
    if !r.at_end() {
        return corrupt("trailing bytes in header region");
    }
    Ok(StreamHeader { params, bit_depth, frames, payload_start: header_len + 4 })
}

fn parse_symbols(raw: &[u8], occ: &[u8], comps: usize) -> Result<Levels, CodecError> {
    let mut planes = vec![vec![0i32; occ.len()]; comps];
    let mut pos = 0;
    for (i, &o) in occ.iter().enumerate() {
        if o == 0 {
            continue;
        }
        for plane in planes.iter_mut() {
            let v = read_uleb(raw, &mut pos).ok_or_else(|| CodecError::CorruptPayload("residual block too short".into()))?;
            plane[i] = i32::try_from(unzigzag(v)).map_err(|_| CodecError::CorruptPayload("residual out of range".into()))?;
        }
    }
    if pos != raw.len() {
        return corrupt("residual block has trailing symbols");
    }
    Ok(planes)
}

fn levels_from_residuals(res: Levels, prev: Option<&Levels>, occ: &[u8], width: usize) -> Levels {
    match prev {
        None => res.iter().map(|plane| reconstruct_from_residual(plane, occ, width)).collect(),
        Some(p) => res
            .into_iter()
            .zip(p)
            .map(|(r, old)| r.iter().zip(old).zip(occ).map(|((d, o), &m)| if m != 0 { d.wrapping_add(*o) } else { 0 }).collect())
            .collect(),
    }
}

fn clamp_level(level: i32, qstep: u32, max: u32) -> u32 {
    dequantize_clamped(level.max(0) as u32, qstep, max)
}

/// Decodes a complete stream. Nothing is returned unless every frame decodes.
pub fn decode_sequence(bytes: &[u8]) -> Result<DecodedSequence, CodecError> {
    let header = read_header(bytes)?;
    let params = header.params;
    let max_depth = max_coord(header.bit_depth);
    let mut r = Reader::new(bytes);
    r.pos = header.payload_start;

    let mut frames = Vec::with_capacity(header.frames.len());
    let mut stats = StreamStats { header_bytes: header.payload_start, frames: Vec::new() };
    let mut prev: Option<(u32, u32, Vec<Levels>)> = None;
    for (i, fh) in header.frames.into_iter().enumerate() {
        let mut blocks = Vec::with_capacity(5);
        let mut channel_bytes = [0usize; 5];
        for cb in channel_bytes.iter_mut() {
            let len = usize::try_from(r.uleb()?).map_err(|_| CodecError::TruncatedPayload)?;
            blocks.push(r.bytes(len)?);
            *cb = len;
        }
        let reference = match (&prev, fh.intra) {
            (_, true) => None,
            (Some((w, h, lv)), false) if (*w, *h) == (fh.width, fh.height) => Some(lv),
            _ => return corrupt(format!("frame {i} is inter-coded without a matching reference")),
        };
        let raws: Vec<Vec<u8>> = blocks.par_iter().map(|b| inflate(b)).collect::<Result<_, _>>()?;
        let area = fh.width as usize * fh.height as usize;
        let occupancy = rle_decode(&raws[0], area)?;
        let width = fh.width as usize;
        let mut levels: Vec<Levels> = Vec::with_capacity(4);
        for (k, raw) in raws[1..].iter().enumerate() {
            let comps = if k < 2 { 1 } else { 3 };
            let res = parse_symbols(raw, &occupancy, comps)?;
            levels.push(levels_from_residuals(res, reference.map(|p| &p[k]), &occupancy, width));
        }

        let gq = params.geometry_qstep;
        let aq = params.attribute_qstep;
        let depth = |lv: &Levels| lv[0].iter().map(|&l| clamp_level(l, gq, max_depth) as u16).collect::<Vec<u16>>();
        let color = |lv: &Levels| {
            (0..area)
                .map(|p| [0, 1, 2].map(|k| clamp_level(lv[k][p], aq, 255) as u8))
                .collect::<Vec<[u8; 3]>>()
        };
        let atlas = Atlas {
            width: fh.width,
            height: fh.height,
            placements: fh.placements,
            geometry_d0: depth(&levels[0]),
            geometry_d1: depth(&levels[1]),
            attribute_a0: color(&levels[2]),
            attribute_a1: color(&levels[3]),
            occupancy,
        };
        let frame = FrameData { atlas, sections: fh.sections, point_count: fh.point_count };
        check_frame(i, &frame).map_err(|e| CodecError::CorruptPayload(e.to_string()))?;
        stats.frames.push(FrameStats { intra: fh.intra, channel_bytes });
        frames.push(frame);
        prev = Some((fh.width, fh.height, levels));
    }
    if !r.at_end() {
        return corrupt("trailing bytes after the last frame");
    }
    Ok(DecodedSequence { params, bit_depth: header.bit_depth, frames, stats })
}

// ---------------------------------------------------------------------------
// rate

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bitrate {
    pub bits_per_second: f64,
    /// Total bits over the total source point count.
    pub bits_per_point: f64,
}

/// `bytes · 8 · frame_rate / frames`; zero for an empty sequence.
pub fn bits_per_second(total_bytes: usize, frames: usize, frame_rate: f64) -> f64 {
    if frames == 0 {
        return 0.0;
    }
    total_bytes as f64 * 8.0 * frame_rate / frames as f64
}

/// Rate of a stream; only the header is parsed.
pub fn bitrate(stream: &[u8], frame_rate: f64) -> Result<Bitrate, CodecError> {
    let header = read_header(stream)?;
    let points: u64 = header.frames.iter().map(|f| f.point_count).sum();
    let bits = stream.len() as f64 * 8.0;
    Ok(Bitrate {
        bits_per_second: bits_per_second(stream.len(), header.frames.len(), frame_rate),
        bits_per_point: if points == 0 { 0.0 } else { bits / points as f64 },
    })
}

#[cfg(test)]
mod tests;
