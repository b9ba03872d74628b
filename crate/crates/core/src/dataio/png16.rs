//! 16-bit grayscale PNG depth maps in the KITTI convention:
//! `depth_m = sample / 256`, sample `0` is the invalid pixel, and writing
//! quantizes with `floor(depth · 256)`. The representable range tops out
//! at 65535/256 ≈ 255.996 m; larger depths are rejected rather than
//! clipped.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::DepthMap;
use crate::scalar::Scalar;

const DEPTH_SCALE: f64 = 256.0;

/// Largest depth that still quantizes into a 16-bit sample.
pub const MAX_PNG16_DEPTH: f64 = 256.0;

pub fn read_depth_png16<S: Scalar, R: Read>(mut reader: R) -> Result<DepthMap<S>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut png_reader = decoder
        .read_info()
        .map_err(|e| Error::format(format!("PNG decode failed: {e}")))?;
    let mut buf = vec![
        0u8;
        png_reader.output_buffer_size().ok_or_else(|| {
            Error::format("PNG dimensions overflow the output buffer".to_string())
        })?
    ];
    let info = png_reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(format!("PNG frame decode failed: {e}")))?;
    if info.bit_depth != png::BitDepth::Sixteen || info.color_type != png::ColorType::Grayscale {
        return Err(Error::format(format!(
            "depth PNG must be 16-bit single-channel grayscale, got {:?} {:?}",
            info.bit_depth, info.color_type
        )));
    }
    let width = info.width as usize;
    let height = info.height as usize;
    let expected = width * height * 2;
    if buf.len() < expected {
        return Err(Error::format(format!(
            "PNG payload holds {} bytes, expected {expected}",
            buf.len()
        )));
    }
    let scale = S::of(1.0 / DEPTH_SCALE);
    let data = buf[..expected]
        .chunks_exact(2)
        .map(|pair| {
            let sample = u16::from_be_bytes([pair[0], pair[1]]);
            S::of_usize(sample as usize) * scale
        })
        .collect();
    DepthMap::new(width, height, data)
}

pub fn write_depth_png16<S: Scalar, W: Write>(writer: W, map: &DepthMap<S>) -> Result<()> {
    let samples = quantize(map)?;
    let mut bytes = Vec::with_capacity(samples.len() * 2);
    for s in samples {
        bytes.extend_from_slice(&s.to_be_bytes());
    }
    let mut encoder = png::Encoder::new(writer, map.width() as u32, map.height() as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Sixteen);
    let mut png_writer = encoder
        .write_header()
        .map_err(|e| Error::format(format!("PNG encode failed: {e}")))?;
    png_writer
        .write_image_data(&bytes)
        .map_err(|e| Error::format(format!("PNG encode failed: {e}")))?;
    Ok(())
}

fn quantize<S: Scalar>(map: &DepthMap<S>) -> Result<Vec<u16>> {
    let scale = S::of(DEPTH_SCALE);
    let limit = S::of(MAX_PNG16_DEPTH);
    map.data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v >= limit {
                return Err(Error::validation(format!(
                    "depth {v} m at pixel ({}, {}) exceeds the PNG16 range (< 256 m); save as PFM instead",
                    i % map.width(),
                    i / map.width()
                )));
            }
            // floor quantization; the rounding-corner clamp keeps the
            // sample in range when v·256 rounds up to exactly 65536
            let q = (v * scale).floor().to_u32().unwrap_or(0).min(65535);
            Ok(q as u16)
        })
        .collect()
}

pub fn load_depth_png16<S: Scalar>(path: impl AsRef<Path>) -> Result<DepthMap<S>> {
    read_depth_png16(BufReader::new(File::open(path)?))
}

pub fn save_depth_png16<S: Scalar>(path: impl AsRef<Path>, map: &DepthMap<S>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_depth_png16(&mut w, map)?;
    w.flush()?;
    Ok(())
}

/// True when every pixel fits the PNG16 range.
pub fn fits_png16<S: Scalar>(map: &DepthMap<S>) -> bool {
    let limit = S::of(MAX_PNG16_DEPTH);
    map.data().iter().all(|v| *v < limit)
}
