//! Plain-text camera calibration files.
//!
//! One `key: values` entry per line; `#` starts a comment. Required keys:
//! `K:` nine row-major reals (pixels), `R:` nine row-major reals, `T:`
//! three reals (meters), `h:` one real (meters), `width:`/`height:`
//! integers (pixels). Keys may appear in any order, each exactly once.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};
use crate::scalar::Scalar;

/// A parsed calibration: the validated camera plus the frame size.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration<S> {
    pub camera: CameraModel<S>,
    pub width: usize,
    pub height: usize,
}

struct Entry {
    line: usize,
    values: Vec<f64>,
}

pub fn parse_calibration<S: Scalar>(text: &str, source: &str) -> Result<Calibration<S>> {
    let mut entries: Vec<(String, Entry)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(Error::parse(format!(
                "{source}:{line_no}: expected 'key: values', got {line:?}"
            )));
        };
        let key = key.trim().to_string();
        if !matches!(key.as_str(), "K" | "R" | "T" | "h" | "width" | "height") {
            return Err(Error::parse(format!(
                "{source}:{line_no}: unknown key {key:?}"
            )));
        }
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(Error::parse(format!(
                "{source}:{line_no}: duplicate key {key:?}"
            )));
        }
        let mut values = Vec::new();
        for token in rest.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| {
                Error::parse(format!(
                    "{source}:{line_no}: {token:?} is not a number in {key:?}"
                ))
            })?;
            values.push(v);
        }
        entries.push((
            key,
            Entry {
                line: line_no,
                values,
            },
        ));
    }

    let lookup = |key: &str, arity: usize| -> Result<&Entry> {
        let entry = entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, e)| e)
            .ok_or_else(|| Error::parse(format!("{source}: missing key {key:?}")))?;
        if entry.values.len() != arity {
            return Err(Error::parse(format!(
                "{source}:{}: key {key:?} needs {arity} values, got {}",
                entry.line,
                entry.values.len()
            )));
        }
        Ok(entry)
    };

    let k_entry = lookup("K", 9)?;
    let r_entry = lookup("R", 9)?;
    let t_entry = lookup("T", 3)?;
    let h_entry = lookup("h", 1)?;
    let width = lookup_dimension(source, lookup("width", 1)?)?;
    let height = lookup_dimension(source, lookup("height", 1)?)?;

    let k: Mat3<S> = to_mat3(&k_entry.values);
    let r: Mat3<S> = to_mat3(&r_entry.values);
    let t: Vec3<S> = [
        S::of(t_entry.values[0]),
        S::of(t_entry.values[1]),
        S::of(t_entry.values[2]),
    ];
    let h = S::of(h_entry.values[0]);

    let camera = CameraModel::new(k, r, t, h).map_err(|e| {
        Error::parse(format!(
            "{source}: invalid camera (K at line {}, R at line {}, T at line {}, h at line {}): {e}",
            k_entry.line, r_entry.line, t_entry.line, h_entry.line
        ))
    })?;
    Ok(Calibration {
        camera,
        width,
        height,
    })
}

fn lookup_dimension(source: &str, entry: &Entry) -> Result<usize> {
    let v = entry.values[0];
    if v.fract() != 0.0 || v < 1.0 || v > usize::MAX as f64 {
        return Err(Error::parse(format!(
            "{source}:{}: dimension must be a positive integer, got {v}",
            entry.line
        )));
    }
    Ok(v as usize)
}

fn to_mat3<S: Scalar>(values: &[f64]) -> Mat3<S> {
    let mut m = [[S::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = S::of(values[3 * i + j]);
        }
    }
    m
}

pub fn load_calibration<S: Scalar>(path: impl AsRef<Path>) -> Result<Calibration<S>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_calibration(&text, &path.display().to_string())
}

pub fn write_calibration<S: Scalar, W: Write>(mut w: W, calib: &Calibration<S>) -> Result<()> {
    let cam = &calib.camera;
    write!(w, "K:")?;
    for row in cam.intrinsics() {
        for v in row {
            write!(w, " {v}")?;
        }
    }
    write!(w, "\nR:")?;
    for row in cam.rotation() {
        for v in row {
            write!(w, " {v}")?;
        }
    }
    write!(w, "\nT:")?;
    for v in cam.translation() {
        write!(w, " {v}")?;
    }
    writeln!(w, "\nh: {}", cam.ground_height())?;
    writeln!(w, "width: {}", calib.width)?;
    writeln!(w, "height: {}", calib.height)?;
    Ok(())
}

pub fn save_calibration<S: Scalar>(path: impl AsRef<Path>, calib: &Calibration<S>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_calibration(&mut w, calib)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const KITTI_STYLE: &str = "\
# forward camera
K: 721.5377 0 609.5593 0 721.5377 172.854 0 0 1
R: 1 0 0 0 1 0 0 0 1
T: 0 0 0
h: 1.65
width: 1242
height: 375
";

    #[test]
    fn kitti_style_file_parses() {
        let calib: Calibration<f64> = parse_calibration(KITTI_STYLE, "test").unwrap();
        assert_eq!(calib.camera.ground_height(), 1.65);
        assert_eq!(calib.camera.intrinsics()[0][0], 721.5377);
        assert_eq!((calib.width, calib.height), (1242, 375));
    }

    #[test]
    fn ddad_style_zero_ground_height_parses() {
        let text = KITTI_STYLE.replace("h: 1.65", "h: 0");
        let calib: Calibration<f64> = parse_calibration(&text, "test").unwrap();
        assert_eq!(calib.camera.ground_height(), 0.0);
    }

    #[test]
    fn non_orthonormal_rotation_is_rejected_with_location() {
        let text = KITTI_STYLE.replace("R: 1 0 0 0 1 0 0 0 1", "R: 1 0 0 0 2 0 0 0 1");
        let err = parse_calibration::<f64>(&text, "test").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("orthonormal"), "{msg}");
        assert!(msg.contains("R at line 3"), "{msg}");
    }

    #[test]
    fn structural_errors_carry_line_numbers() {
        let err = parse_calibration::<f64>("K: 1 2 3\n", "test").unwrap_err();
        assert!(err.to_string().contains("test:1"), "{err}");
        assert!(err.to_string().contains("9 values"), "{err}");

        let err = parse_calibration::<f64>("width: 10\nwidth: 20\n", "test").unwrap_err();
        assert!(err.to_string().contains("test:2"), "{err}");
        assert!(err.to_string().contains("duplicate"), "{err}");

        let err = parse_calibration::<f64>("bogus: 1\n", "test").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");

        let err = parse_calibration::<f64>("h: abc\n", "test").unwrap_err();
        assert!(err.to_string().contains("not a number"), "{err}");

        // locale-independent: comma decimals are rejected
        let err = parse_calibration::<f64>("h: 1,65\n", "test").unwrap_err();
        assert!(err.to_string().contains("not a number"), "{err}");

        let err = parse_calibration::<f64>(KITTI_STYLE.replace("h: 1.65\n", "").as_str(), "test")
            .unwrap_err();
        assert!(err.to_string().contains("missing key \"h\""), "{err}");

        let err = parse_calibration::<f64>(
            KITTI_STYLE.replace("width: 1242", "width: 10.5").as_str(),
            "test",
        )
        .unwrap_err();
        assert!(err.to_string().contains("positive integer"), "{err}");
    }

    #[test]
    fn write_parse_round_trip_is_exact() {
        let calib: Calibration<f64> = parse_calibration(KITTI_STYLE, "test").unwrap();
        let mut buf = Vec::new();
        write_calibration(&mut buf, &calib).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let again: Calibration<f64> = parse_calibration(&text, "round").unwrap();
        assert_eq!(calib, again);
    }
}
