//! Netpbm dumps of atlas channels for inspection.

use std::io::{self, Write};

use crate::atlas::Atlas;
use crate::cloud::Color;

/// Binary PGM (P5). Samples above 255 are written as 16-bit big endian.
pub fn write_pgm<W: Write>(mut out: W, width: u32, height: u32, samples: &[u16]) -> io::Result<()> {
    let maxval = samples.iter().copied().max().unwrap_or(0).max(1);
    write!(out, "P5\n{width} {height}\n{maxval}\n")?;
    if maxval > 255 {
        for s in samples {
            out.write_all(&s.to_be_bytes())?;
        }
    } else {
        let bytes: Vec<u8> = samples.iter().map(|&s| s as u8).collect();
        out.write_all(&bytes)?;
    }
    Ok(())
}

/// Binary PPM (P6).
pub fn write_ppm<W: Write>(mut out: W, width: u32, height: u32, pixels: &[Color]) -> io::Result<()> {
    write!(out, "P6\n{width} {height}\n255\n")?;
    for p in pixels {
        out.write_all(p)?;
    }
    Ok(())
}

/// Writes `occupancy.pgm`, `d0.pgm`, `d1.pgm`, `a0.ppm` and `a1.ppm` into `dir`.
pub fn dump_atlas(atlas: &Atlas, dir: &std::path::Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let file = |name: &str| std::fs::File::create(dir.join(name)).map(io::BufWriter::new);
    let occ: Vec<u16> = atlas.occupancy.iter().map(|&o| if o != 0 { 255 } else { 0 }).collect();
    write_pgm(file("occupancy.pgm")?, atlas.width, atlas.height, &occ)?;
    write_pgm(file("d0.pgm")?, atlas.width, atlas.height, &atlas.geometry_d0)?;
    write_pgm(file("d1.pgm")?, atlas.width, atlas.height, &atlas.geometry_d1)?;
    write_ppm(file("a0.ppm")?, atlas.width, atlas.height, &atlas.attribute_a0)?;
    write_ppm(file("a1.ppm")?, atlas.width, atlas.height, &atlas.attribute_a1)?;
    Ok(())
}
