//! Extension-driven map loading and atomic file writes.
//!
//! Every output is written to a temporary file in the destination
//! directory and renamed into place, so interrupted runs never leave a
//! half-written artifact.

use std::path::{Path, PathBuf};

use grounddepth::dataio::pfm::{load_pfm, write_pfm, PfmMap};
use grounddepth::dataio::png16::{fits_png16, load_depth_png16, write_depth_png16};
use grounddepth::map::{AttentionMap, DepthMap, SlopeMap};
use grounddepth::{Error, Result};

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase()
}

/// Loads a depth map from `.pfm` or `.png` (KITTI 16-bit convention).
pub fn load_depth(path: &Path) -> Result<DepthMap<f64>> {
    match extension(path).as_str() {
        "pfm" => load_pfm(path)?.to_depth_map(),
        "png" => load_depth_png16(path),
        other => Err(Error::Validation(format!(
            "unsupported depth-map extension {other:?} for {}; use .pfm or .png",
            path.display()
        ))),
    }
}

pub fn load_slope(path: &Path) -> Result<SlopeMap<f64>> {
    match extension(path).as_str() {
        "pfm" => load_pfm(path)?.to_slope_map(),
        other => Err(Error::Validation(format!(
            "slope maps are stored as PFM; got extension {other:?} for {}",
            path.display()
        ))),
    }
}

pub fn load_attention(path: &Path) -> Result<AttentionMap<f64>> {
    match extension(path).as_str() {
        "pfm" => load_pfm(path)?.to_attention_map(),
        other => Err(Error::Validation(format!(
            "attention maps are stored as PFM; got extension {other:?} for {}",
            path.display()
        ))),
    }
}

/// Writes bytes atomically (temp file + rename) into `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path).map_err(|e| {
        Error::Io(std::io::Error::other(format!(
            "renaming into {} failed: {e}",
            path.display()
        )))
    })?;
    Ok(())
}

/// Saves a depth map honoring the requested extension. A `.png` request
/// falls back to `.pfm` (with a notice on stdout) when any pixel is at or
/// beyond the 256 m PNG16 range. Returns the path actually written.
pub fn save_depth_auto(path: &Path, map: &DepthMap<f64>) -> Result<PathBuf> {
    match extension(path).as_str() {
        "pfm" => {
            save_depth_pfm(path, map)?;
            Ok(path.to_path_buf())
        }
        "png" => {
            if fits_png16(map) {
                let mut bytes = Vec::new();
                write_depth_png16(&mut bytes, map)?;
                write_atomic(path, &bytes)?;
                Ok(path.to_path_buf())
            } else {
                let fallback = path.with_extension("pfm");
                println!(
                    "note: depths reach 256 m or more; PNG16 cannot represent them, writing {} instead",
                    fallback.display()
                );
                save_depth_pfm(&fallback, map)?;
                Ok(fallback)
            }
        }
        other => Err(Error::Validation(format!(
            "unsupported depth-map extension {other:?} for {}; use .pfm or .png",
            path.display()
        ))),
    }
}

pub fn save_depth_pfm(path: &Path, map: &DepthMap<f64>) -> Result<()> {
    let pfm = PfmMap::from_depth_map(map)?;
    let mut bytes = Vec::new();
    write_pfm(&mut bytes, &pfm)?;
    write_atomic(path, &bytes)
}

pub fn save_slope_pfm(path: &Path, map: &SlopeMap<f64>) -> Result<()> {
    let pfm = PfmMap::from_slope_map(map)?;
    let mut bytes = Vec::new();
    write_pfm(&mut bytes, &pfm)?;
    write_atomic(path, &bytes)
}
