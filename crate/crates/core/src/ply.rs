//! PLY reading (ascii and binary little-endian) and writing (binary little-endian).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::cloud::{Color, CloudError, Point, PointCloud};

#[derive(Debug, thiserror::Error)]
pub enum PlyError {
    #[error("I/O error: {0}")]
    IoFailure(#[from] io::Error),
    #[error("malformed PLY header: {0}")]
    MalformedHeader(String),
    #[error("PLY vertex element lacks property `{0}`")]
    MissingProperty(&'static str),
    #[error("unsupported PLY format `{0}`")]
    UnsupportedFormat(String),
    #[error("malformed PLY body: {0}")]
    MalformedBody(String),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

/// Result of [`load_ply`]: the deduplicated cloud and how many duplicates were dropped.
#[derive(Debug, Clone)]
pub struct LoadedPly {
    pub cloud: PointCloud,
    pub duplicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Header {
    format: Format,
    elements: Vec<Element>,
    body_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, PlyError> {
    let bad = |m: &str| PlyError::MalformedHeader(m.to_string());
    let end_marker = b"end_header";
    let end = bytes
        .windows(end_marker.len())
        .position(|w| w == end_marker)
        .ok_or_else(|| bad("missing end_header"))?;
    let mut body_offset = end + end_marker.len();
    // the terminating newline may be \n or \r\n
    if bytes.get(body_offset) == Some(&b'\r') {
        body_offset += 1;
    }
    if bytes.get(body_offset) == Some(&b'\n') {
        body_offset += 1;
    }
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8"))?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("ply") {
        return Err(bad("missing `ply` magic"));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok[0] {
            "format" => {
                let f = tok.get(1).copied().unwrap_or("");
                format = Some(match f {
                    "ascii" => Format::Ascii,
                    "binary_little_endian" => Format::BinaryLe,
                    other => return Err(PlyError::UnsupportedFormat(other.to_string())),
                });
            }
            "comment" | "obj_info" => {}
            "element" => {
                if tok.len() != 3 {
                    return Err(bad(line));
                }
                let count = tok[2].parse().map_err(|_| bad(line))?;
                elements.push(Element { name: tok[1].to_string(), count, props: Vec::new() });
            }
            "property" => {
                let el = elements.last_mut().ok_or_else(|| bad("property before element"))?;
                let prop = if tok.get(1) == Some(&"list") {
                    if tok.len() != 5 {
                        return Err(bad(line));
                    }
                    Property::List {
                        count: Scalar::parse(tok[2]).ok_or_else(|| bad(line))?,
                        item: Scalar::parse(tok[3]).ok_or_else(|| bad(line))?,
                    }
                } else {
                    if tok.len() != 3 {
                        return Err(bad(line));
                    }
                    Property::Scalar {
                        name: tok[2].to_string(),
                        ty: Scalar::parse(tok[1]).ok_or_else(|| bad(line))?,
                    }
                };
                el.props.push(prop);
            }
            _ => return Err(bad(line)),
        }
    }
    let format = format.ok_or_else(|| bad("missing format line"))?;
    Ok(Header { format, elements, body_offset })
}

const XYZ_RGB: [&str; 6] = ["x", "y", "z", "red", "green", "blue"];

/// Loads a PLY file. Float coordinates are rounded half away from zero;
/// duplicate coordinates are dropped keeping the first occurrence.
pub fn load_ply(path: impl AsRef<Path>, bit_depth: u8) -> Result<LoadedPly, PlyError> {
    let bytes = fs::read(path)?;
    parse_ply(&bytes, bit_depth)
}

pub fn parse_ply(bytes: &[u8], bit_depth: u8) -> Result<LoadedPly, PlyError> {
    let header = parse_header(bytes)?;
    let vertex_idx = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| PlyError::MalformedHeader("no vertex element".into()))?;
    let vertex = &header.elements[vertex_idx];
    let mut slots = [usize::MAX; 6];
    for (slot, want) in slots.iter_mut().zip(XYZ_RGB) {
        *slot = vertex
            .props
            .iter()
            .position(|p| matches!(p, Property::Scalar { name, .. } if name == want))
            .ok_or(PlyError::MissingProperty(want))?;
    }

    let body = &bytes[header.body_offset..];
    let mut rows: Vec<[f64; 6]> = Vec::with_capacity(vertex.count);
    let mut values = Vec::new();
    match header.format {
        Format::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| PlyError::MalformedBody("not UTF-8".into()))?;
            let mut tokens = text.split_ascii_whitespace();
            for (ei, el) in header.elements.iter().enumerate().take(vertex_idx + 1) {
                for _ in 0..el.count {
                    values.clear();
                    for prop in &el.props {
                        match prop {
                            Property::Scalar { .. } => values.push(next_ascii(&mut tokens)?),
                            Property::List { .. } => {
                                let n = next_ascii(&mut tokens)? as usize;
                                for _ in 0..n {
                                    next_ascii(&mut tokens)?;
                                }
                                values.push(f64::NAN);
                            }
                        }
                    }
                    if ei == vertex_idx {
                        rows.push(slots.map(|s| values[s]));
                    }
                }
            }
        }
        Format::BinaryLe => {
            let mut pos = 0usize;
            let take = |pos: &mut usize, n: usize| -> Result<&[u8], PlyError> {
                let s = body
                    .get(*pos..*pos + n)
                    .ok_or_else(|| PlyError::MalformedBody("unexpected end of data".into()))?;
                *pos += n;
                Ok(s)
            };
            for (ei, el) in header.elements.iter().enumerate().take(vertex_idx + 1) {
                for _ in 0..el.count {
                    values.clear();
                    for prop in &el.props {
                        match *prop {
                            Property::Scalar { ty, .. } => values.push(ty.read_le(take(&mut pos, ty.size())?)),
                            Property::List { count, item } => {
                                let n = count.read_le(take(&mut pos, count.size())?) as usize;
                                take(&mut pos, n * item.size())?;
                                values.push(f64::NAN);
                            }
                        }
                    }
                    if ei == vertex_idx {
                        rows.push(slots.map(|s| values[s]));
                    }
                }
            }
        }
    }

    let limit = crate::cloud::max_coord(bit_depth) as f64;
    let mut points: Vec<Point> = Vec::with_capacity(rows.len());
    let mut colors: Vec<Color> = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let mut p = [0u32; 3];
        for k in 0..3 {
            // f64::round rounds half away from zero
            let v = r[k].round();
            if !(0.0..=limit).contains(&v) {
                return Err(PlyError::MalformedBody(format!(
                    "vertex {i}: coordinate {} outside [0, {limit}]",
                    r[k]
                )));
            }
            p[k] = v as u32;
        }
        let mut c = [0u8; 3];
        for k in 0..3 {
            let v = r[3 + k].round();
            if !(0.0..=255.0).contains(&v) {
                return Err(PlyError::MalformedBody(format!("vertex {i}: color {} outside [0, 255]", r[3 + k])));
            }
            c[k] = v as u8;
        }
        points.push(p);
        colors.push(c);
    }
    let (cloud, duplicates) = PointCloud::dedup(points, colors, bit_depth)?;
    if duplicates > 0 {
        log::warn!("dropped {duplicates} duplicate points");
    }
    Ok(LoadedPly { cloud, duplicates })
}

fn next_ascii<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<f64, PlyError> {
    let t = tokens
        .next()
        .ok_or_else(|| PlyError::MalformedBody("unexpected end of data".into()))?;
    t.parse::<f64>()
        .map_err(|_| PlyError::MalformedBody(format!("bad number `{t}`")))
}

/// Serializes a cloud as binary little-endian PLY with float xyz and uchar rgb.
pub fn write_ply<W: Write>(cloud: &PointCloud, mut w: W) -> io::Result<()> {
    write!(
        w,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
         property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        cloud.len()
    )?;
    let mut rec = [0u8; 15];
    for (p, c) in cloud.iter() {
        for k in 0..3 {
            rec[4 * k..4 * k + 4].copy_from_slice(&(p[k] as f32).to_le_bytes());
        }
        rec[12..].copy_from_slice(c);
        w.write_all(&rec)?;
    }
    w.flush()
}

pub fn save_ply(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<(), PlyError> {
    let f = fs::File::create(path)?;
    write_ply(cloud, BufWriter::new(f))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ascii(body: &str, n: usize) -> Vec<u8> {
        format!(
            "ply\nformat ascii 1.0\nelement vertex {n}\nproperty float x\nproperty float y\nproperty float z\n\
             property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n{body}"
        )
        .into_bytes()
    }

    #[test]
    fn single_ascii_vertex() {
        let l = parse_ply(&ascii("0 0 0 255 0 0\n", 1), 10).unwrap();
        assert_eq!(l.cloud.points(), &[[0, 0, 0]]);
        assert_eq!(l.cloud.colors(), &[[255, 0, 0]]);
        assert_eq!(l.duplicates, 0);
    }

    #[test]
    fn duplicates_reported() {
        let l = parse_ply(&ascii("1 2 3 9 9 9\n1 2 3 8 8 8\n", 2), 10).unwrap();
        assert_eq!(l.cloud.len(), 1);
        assert_eq!(l.duplicates, 1);
        assert_eq!(l.cloud.colors(), &[[9, 9, 9]]);
    }

    #[test]
    fn floats_round_half_away_from_zero() {
        let l = parse_ply(&ascii("1.5 2.49 0.5 0 0 0\n", 1), 10).unwrap();
        assert_eq!(l.cloud.points(), &[[2, 2, 1]]);
    }

    #[test]
    fn missing_color_property() {
        let src = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n";
        assert!(matches!(parse_ply(src, 10), Err(PlyError::MissingProperty("red"))));
    }

    #[test]
    fn big_endian_unsupported() {
        let src = b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(parse_ply(src, 10), Err(PlyError::UnsupportedFormat(_))));
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(parse_ply(b"ply\nformat ascii 1.0\n", 10), Err(PlyError::MalformedHeader(_))));
        assert!(matches!(parse_ply(b"plx\nend_header\n", 10), Err(PlyError::MalformedHeader(_))));
    }

    #[test]
    fn skips_extra_properties_and_elements() {
        let src = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\n\
                   property float nx\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n\
                   element face 1\nproperty list uchar int vertex_indices\nend_header\n\
                   1 2 3 0.5 10 20 30\n4 5 6 0.1 40 50 60\n3 0 1 1\n";
        let l = parse_ply(src.as_bytes(), 10).unwrap();
        assert_eq!(l.cloud.points(), &[[1, 2, 3], [4, 5, 6]]);
        assert_eq!(l.cloud.colors(), &[[10, 20, 30], [40, 50, 60]]);
    }

    #[test]
    fn empty_cloud_writes_valid_file() {
        let mut buf = Vec::new();
        write_ply(&PointCloud::empty(10), &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("element vertex 0"));
        assert!(parse_ply(&buf, 10).unwrap().cloud.is_empty());
    }

    #[test]
    fn boundary_coordinate_survives() {
        let c = PointCloud::new(vec![[1023, 0, 512]], vec![[1, 2, 3]], 10).unwrap();
        let mut buf = Vec::new();
        write_ply(&c, &mut buf).unwrap();
        assert_eq!(parse_ply(&buf, 10).unwrap().cloud, c);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(parse_ply(&ascii("1024 0 0 0 0 0\n", 1), 10), Err(PlyError::MalformedBody(_))));
        assert!(matches!(parse_ply(&ascii("-1 0 0 0 0 0\n", 1), 10), Err(PlyError::MalformedBody(_))));
    }

    #[test]
    fn truncated_binary_body() {
        let c = PointCloud::new(vec![[1, 2, 3]], vec![[1, 2, 3]], 10).unwrap();
        let mut buf = Vec::new();
        write_ply(&c, &mut buf).unwrap();
        buf.pop();
        assert!(matches!(parse_ply(&buf, 10), Err(PlyError::MalformedBody(_))));
    }
}
