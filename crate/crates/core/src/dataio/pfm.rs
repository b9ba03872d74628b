//! PFM (portable float map) reader and writer, grayscale `Pf` only.
//!
//! Layout: the ASCII header `Pf`, width, height, and a scale factor as
//! whitespace-separated tokens, one whitespace byte, then `width·height`
//! 32-bit IEEE floats. A negative scale marks a little-endian payload.
//! Rows are stored bottom-up: the first payload row is the bottom image
//! row. The scale magnitude is preserved but not applied to values.
//!
//! Slope maps have no natural sentinel (0 rad is a valid slope), so
//! invalid slope pixels serialize as [`SLOPE_INVALID_PFM`].

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::{AttentionMap, DepthMap, SlopeMap};
use crate::scalar::Scalar;

/// Placeholder stored for invalid slope pixels (exactly representable in
/// f32 and far outside the ±π/6 angle range).
pub const SLOPE_INVALID_PFM: f32 = 1e9;

/// A decoded PFM image: single channel, top-down row-major in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct PfmMap {
    width: usize,
    height: usize,
    scale: f32,
    data: Vec<f32>,
}

impl PfmMap {
    /// Wraps raw samples; `scale` keeps its sign convention (negative =
    /// little-endian payload on disk).
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("PFM dimensions must be >= 1"));
        }
        if data.len() != width * height {
            return Err(Error::dims(format!(
                "PFM expects {} samples for {}x{}, got {}",
                width * height,
                width,
                height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            scale: -1.0,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Header scale field as stored; negative means little-endian.
    pub fn scale(&self) -> f32 {
        self.scale
    }

    /// Samples, top-down row-major.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.data[y * self.width + x]
    }

    pub fn from_depth_map<S: Scalar>(map: &DepthMap<S>) -> Result<Self> {
        let data = map
            .data()
            .iter()
            .map(|v| {
                let f = v.to_f32().unwrap_or(f32::INFINITY);
                if f.is_finite() {
                    Ok(f)
                } else {
                    Err(Error::validation(format!(
                        "depth {v} exceeds the 32-bit float range of PFM"
                    )))
                }
            })
            .collect::<Result<Vec<f32>>>()?;
        Self::new(map.width(), map.height(), data)
    }

    pub fn to_depth_map<S: Scalar>(&self) -> Result<DepthMap<S>> {
        let data = self.data.iter().map(|&f| S::of(f as f64)).collect();
        DepthMap::new(self.width, self.height, data)
    }

    pub fn from_slope_map<S: Scalar>(map: &SlopeMap<S>) -> Result<Self> {
        let mut data = Vec::with_capacity(map.angles().len());
        for (i, &a) in map.angles().iter().enumerate() {
            if map.validity()[i] {
                let f = a.to_f32().unwrap_or(f32::NAN);
                if !f.is_finite() {
                    return Err(Error::validation(format!(
                        "slope {a} does not fit a 32-bit float"
                    )));
                }
                data.push(f);
            } else {
                data.push(SLOPE_INVALID_PFM);
            }
        }
        Self::new(map.width(), map.height(), data)
    }

    pub fn to_slope_map<S: Scalar>(&self) -> Result<SlopeMap<S>> {
        let mut angles = vec![S::zero(); self.data.len()];
        let mut valid = vec![false; self.data.len()];
        for (i, &f) in self.data.iter().enumerate() {
            if f == SLOPE_INVALID_PFM {
                continue;
            }
            angles[i] = S::of(f as f64);
            valid[i] = true;
        }
        SlopeMap::new(self.width, self.height, angles, valid)
    }

    pub fn from_attention_map<S: Scalar>(map: &AttentionMap<S>) -> Result<Self> {
        let data = map
            .weights()
            .iter()
            .map(|w| w.to_f32().unwrap_or(0.0))
            .collect();
        Self::new(map.width(), map.height(), data)
    }

    pub fn to_attention_map<S: Scalar>(&self) -> Result<AttentionMap<S>> {
        let data = self.data.iter().map(|&f| S::of(f as f64)).collect();
        AttentionMap::new(self.width, self.height, data)
    }
}

/// Decodes a PFM stream. Malformed headers and truncated payloads report
/// the byte offset of the failure.
pub fn read_pfm<R: Read>(mut reader: R) -> Result<PfmMap> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let mut pos = 0usize;

    let magic = next_token(&bytes, &mut pos)?;
    match magic.as_str() {
        "Pf" => {}
        "PF" => {
            return Err(Error::format(
                "color PFM ('PF') is not supported; expected grayscale 'Pf' at offset 0"
                    .to_string(),
            ))
        }
        other => {
            return Err(Error::format(format!(
                "bad PFM magic {other:?} at offset 0, expected 'Pf'"
            )))
        }
    }

    let width = parse_dim(&bytes, &mut pos, "width")?;
    let height = parse_dim(&bytes, &mut pos, "height")?;
    let (token, scale_at) = next_token_at(&bytes, &mut pos)?;
    let scale: f32 = token
        .parse()
        .map_err(|_| Error::format(format!("bad PFM scale at offset {scale_at}")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format(format!(
            "PFM scale must be finite and non-zero, got {scale} at offset {scale_at}"
        )));
    }
    // exactly one whitespace byte separates the header from the payload
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format(format!(
            "missing whitespace after PFM scale at offset {pos}"
        )));
    }
    pos += 1;

    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format("PFM dimensions overflow".to_string()))?;
    let available = bytes.len() - pos;
    if available < expected {
        return Err(Error::format(format!(
            "truncated PFM payload: need {expected} bytes, stream ends at offset {} ({} short)",
            bytes.len(),
            expected - available
        )));
    }

    let little_endian = scale < 0.0;
    let mut data = vec![0f32; width * height];
    for file_row in 0..height {
        let img_row = height - 1 - file_row; // bottom-up storage
        for x in 0..width {
            let at = pos + (file_row * width + x) * 4;
            let raw: [u8; 4] = bytes[at..at + 4].try_into().expect("length checked");
            data[img_row * width + x] = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
        }
    }

    let mut map = PfmMap::new(width, height, data)?;
    map.scale = scale;
    Ok(map)
}

/// Encodes a PFM stream; the payload endianness follows the map's scale
/// sign. `NaN` samples are rejected.
pub fn write_pfm<W: Write>(mut writer: W, map: &PfmMap) -> Result<()> {
    if let Some(i) = map.data.iter().position(|f| f.is_nan()) {
        return Err(Error::validation(format!(
            "NaN at pixel ({}, {}) cannot be written to PFM",
            i % map.width,
            i / map.width
        )));
    }
    write!(writer, "Pf\n{} {}\n{}\n", map.width, map.height, map.scale)?;
    let little_endian = map.scale < 0.0;
    let mut payload = Vec::with_capacity(map.data.len() * 4);
    for img_row in (0..map.height).rev() {
        for x in 0..map.width {
            let f = map.data[img_row * map.width + x];
            let raw = if little_endian {
                f.to_le_bytes()
            } else {
                f.to_be_bytes()
            };
            payload.extend_from_slice(&raw);
        }
    }
    writer.write_all(&payload)?;
    Ok(())
}

pub fn load_pfm(path: impl AsRef<Path>) -> Result<PfmMap> {
    read_pfm(BufReader::new(File::open(path)?))
}

pub fn save_pfm(path: impl AsRef<Path>, map: &PfmMap) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_pfm(&mut w, map)?;
    w.flush()?;
    Ok(())
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    next_token_at(bytes, pos).map(|(token, _)| token)
}

fn next_token_at(bytes: &[u8], pos: &mut usize) -> Result<(String, usize)> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos >= bytes.len() {
        return Err(Error::format(format!(
            "unexpected end of PFM header at offset {pos}"
        )));
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let token = String::from_utf8(bytes[start..*pos].to_vec())
        .map_err(|_| Error::format(format!("non-ASCII PFM header token at offset {start}")))?;
    Ok((token, start))
}

fn parse_dim(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let (token, at) = next_token_at(bytes, pos)?;
    let dim: usize = token
        .parse()
        .map_err(|_| Error::format(format!("bad PFM {what} {token:?} at offset {at}")))?;
    if dim == 0 {
        return Err(Error::format(format!(
            "PFM {what} must be >= 1 at offset {at}"
        )));
    }
    Ok(dim)
}
