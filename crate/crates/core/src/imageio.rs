//! Binary image and grasp-map formats: PPM (P6), PGM (P5) and GMAP.

use std::fs;
use std::path::Path;

use crate::annotate::GraspMap;
use crate::error::{CoreError, Result};
use crate::raster::{Image, Mask, Raster};

pub const GMAP_MAGIC: &[u8; 4] = b"GMAP";
pub const GMAP_VERSION: u32 = 1;

fn to_byte(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.cols, img.rows).into_bytes();
    out.extend(img.data.iter().map(|&v| to_byte(v)));
    out
}

pub fn encode_pgm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", r.cols, r.rows).into_bytes();
    out.extend(r.data.iter().map(|&v| to_byte(v)));
    out
}

/// Parses a netpbm header and returns (cols, rows, payload offset).
fn parse_header(bytes: &[u8], magic: &str) -> Result<(usize, usize, usize)> {
    let mut fields = Vec::new();
    let mut i = 0;
    while fields.len() < 4 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(CoreError::Format("truncated netpbm header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    if fields[0] != magic {
        return Err(CoreError::Format(format!("expected {magic}, found {:?}", fields[0])));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| CoreError::Format(format!("bad header field {s:?}")));
    let (cols, rows, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval != 255 {
        return Err(CoreError::Format(format!("unsupported maxval {maxval}")));
    }
    Ok((cols, rows, i + 1))
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Image> {
    let (cols, rows, off) = parse_header(bytes, "P6")?;
    let body = bytes.get(off..off + rows * cols * 3).ok_or_else(|| CoreError::Format("truncated PPM".into()))?;
    Ok(Image { rows, cols, data: body.iter().map(|&b| b as f32 / 255.0).collect() })
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Raster> {
    let (cols, rows, off) = parse_header(bytes, "P5")?;
    let body = bytes.get(off..off + rows * cols).ok_or_else(|| CoreError::Format("truncated PGM".into()))?;
    Ok(Raster::from_vec(rows, cols, body.iter().map(|&b| b as f32 / 255.0).collect()))
}

pub fn write_ppm(img: &Image, path: &Path) -> Result<()> {
    Ok(fs::write(path, encode_ppm(img))?)
}

pub fn write_pgm(r: &Raster, path: &Path) -> Result<()> {
    Ok(fs::write(path, encode_pgm(r))?)
}

pub fn write_mask_pgm(m: &Mask, path: &Path) -> Result<()> {
    write_pgm(&m.to_raster(), path)
}

pub fn read_ppm(path: &Path) -> Result<Image> {
    decode_ppm(&fs::read(path)?)
}

pub fn read_pgm(path: &Path) -> Result<Raster> {
    decode_pgm(&fs::read(path)?)
}

/// 16-byte header (magic, version, m, n as LE u32) then Q and R as LE f32.
pub fn encode_gmap(g: &GraspMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * g.q.data.len());
    out.extend_from_slice(GMAP_MAGIC);
    out.extend_from_slice(&GMAP_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.q.rows as u32).to_le_bytes());
    out.extend_from_slice(&(g.q.cols as u32).to_le_bytes());
    for v in g.q.data.iter().chain(&g.r.data) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_gmap(bytes: &[u8]) -> Result<GraspMap> {
    if bytes.len() < 16 {
        return Err(CoreError::Format("truncated GMAP header".into()));
    }
    if &bytes[0..4] != GMAP_MAGIC {
        return Err(CoreError::Format(format!("bad GMAP magic {:?}", &bytes[0..4])));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != GMAP_VERSION {
        return Err(CoreError::Format(format!("unsupported GMAP version {version}")));
    }
    let (m, n) = (word(8) as usize, word(12) as usize);
    let count = m * n;
    if bytes.len() != 16 + 8 * count {
        return Err(CoreError::Format(format!("GMAP payload is {} bytes, expected {}", bytes.len() - 16, 8 * count)));
    }
    let floats: Vec<f32> = bytes[16..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Ok(GraspMap {
        q: Raster::from_vec(m, n, floats[..count].to_vec()),
        r: Raster::from_vec(m, n, floats[count..].to_vec()),
    })
}

pub fn write_gmap(g: &GraspMap, path: &Path) -> Result<()> {
    Ok(fs::write(path, encode_gmap(g))?)
}

pub fn read_gmap(path: &Path) -> Result<GraspMap> {
    decode_gmap(&fs::read(path)?)
}
