//! Line-oriented text formats for sparse depth samples and slope labels.
//!
//! Sparse depth: `u v z` per line (pixels, pixels, meters).
//! Slope labels: `u v class alpha_deg flag` per line, angle in degrees,
//! flag `1` when the sample was clamped into the binning range.
//! `#` starts a comment in both formats.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::groundgeom::{SlopeLabel, SparseDepth, SparseSample};
use crate::scalar::{deg_to_rad, rad_to_deg, Scalar};

pub fn parse_sparse_text<S: Scalar>(text: &str, source: &str) -> Result<SparseDepth<S>> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = parse_fields(line, 3, source, line_no)?;
        samples.push(SparseSample {
            u: S::of(fields[0]),
            v: S::of(fields[1]),
            z: S::of(fields[2]),
        });
    }
    SparseDepth::new(samples)
        .map_err(|e| Error::parse(format!("{source}: invalid sample set: {e}")))
}

pub fn load_sparse_text<S: Scalar>(path: impl AsRef<Path>) -> Result<SparseDepth<S>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_sparse_text(&text, &path.display().to_string())
}

pub fn write_sparse_text<S: Scalar, W: Write>(mut w: W, sparse: &SparseDepth<S>) -> Result<()> {
    writeln!(w, "# u v z")?;
    for s in sparse.samples() {
        writeln!(w, "{} {} {}", s.u, s.v, s.z)?;
    }
    Ok(())
}

pub fn save_sparse_text<S: Scalar>(path: impl AsRef<Path>, sparse: &SparseDepth<S>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sparse_text(&mut w, sparse)?;
    w.flush()?;
    Ok(())
}

pub fn parse_labels<S: Scalar>(text: &str, source: &str) -> Result<Vec<SlopeLabel<S>>> {
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = parse_fields(line, 5, source, line_no)?;
        let class = fields[2];
        if class.fract() != 0.0 || class < 0.0 {
            return Err(Error::parse(format!(
                "{source}:{line_no}: class must be a non-negative integer, got {class}"
            )));
        }
        let flag = fields[4];
        if flag != 0.0 && flag != 1.0 {
            return Err(Error::parse(format!(
                "{source}:{line_no}: flag must be 0 or 1, got {flag}"
            )));
        }
        labels.push(SlopeLabel {
            u: S::of(fields[0]),
            v: S::of(fields[1]),
            class: class as usize,
            alpha: deg_to_rad(S::of(fields[3])),
            clamped: flag == 1.0,
        });
    }
    Ok(labels)
}

pub fn load_labels<S: Scalar>(path: impl AsRef<Path>) -> Result<Vec<SlopeLabel<S>>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_labels(&text, &path.display().to_string())
}

pub fn write_labels<S: Scalar, W: Write>(mut w: W, labels: &[SlopeLabel<S>]) -> Result<()> {
    writeln!(w, "# u v class alpha_deg flag")?;
    for l in labels {
        writeln!(
            w,
            "{} {} {} {} {}",
            l.u,
            l.v,
            l.class,
            rad_to_deg(l.alpha),
            u8::from(l.clamped)
        )?;
    }
    Ok(())
}

pub fn save_labels<S: Scalar>(path: impl AsRef<Path>, labels: &[SlopeLabel<S>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_labels(&mut w, labels)?;
    w.flush()?;
    Ok(())
}

fn parse_fields(line: &str, arity: usize, source: &str, line_no: usize) -> Result<Vec<f64>> {
    let mut fields = Vec::with_capacity(arity);
    for token in line.split_whitespace() {
        let v: f64 = token
            .parse()
            .map_err(|_| Error::parse(format!("{source}:{line_no}: {token:?} is not a number")))?;
        fields.push(v);
    }
    if fields.len() != arity {
        return Err(Error::parse(format!(
            "{source}:{line_no}: expected {arity} fields, got {}",
            fields.len()
        )));
    }
    Ok(fields)
}
