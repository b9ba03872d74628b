//! Dense per-pixel raster types: depth, ground slope, and ground attention.
//!
//! All maps are row-major with pixel `(x, y)` at index `y * width + x`;
//! continuous pixel coordinates `(u, v)` put the pixel center at integer
//! indices, `u` along columns and `v` along rows.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Admissible ground-slope magnitude in radians (π/6).
pub fn max_slope_angle<S: Scalar>() -> S {
    S::PI() / S::of(6.0)
}

// slack for angles that are exactly ±π/6 after unit conversion or an f32
// round trip
fn slope_range_ok<S: Scalar>(angle: S) -> bool {
    angle.is_finite() && angle.abs() <= max_slope_angle::<S>() + S::of(1e-6)
}

/// Dense depth map in meters.
///
/// A value of exactly `0` is the invalidity sentinel (no ground depth at
/// that pixel); valid values are finite and strictly positive. Negative or
/// non-finite values are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap<S> {
    width: usize,
    height: usize,
    data: Vec<S>,
}

impl<S: Scalar> DepthMap<S> {
    pub fn new(width: usize, height: usize, data: Vec<S>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("depth map dimensions must be >= 1"));
        }
        if data.len() != width * height {
            return Err(Error::dims(format!(
                "depth map expects {} values for {}x{}, got {}",
                width * height,
                width,
                height,
                data.len()
            )));
        }
        for (i, &v) in data.iter().enumerate() {
            if !v.is_finite() || v < S::zero() {
                return Err(Error::validation(format!(
                    "depth map value {} at pixel ({}, {}) violates the finite, non-negative invariant",
                    v,
                    i % width,
                    i / width
                )));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Construction path for generated maps whose code already guarantees
    /// the invariant (sentinel logic writes only `0` or positive finite).
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<S>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| v.is_finite() && *v >= S::zero()));
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: S) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> S {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.data[y * self.width + x]
    }

    /// True when the pixel holds a valid (positive) depth.
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.get(x, y) > S::zero()
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|v| **v > S::zero()).count()
    }

    /// Iterates `(x, y, depth)` over valid pixels in row-major order.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > S::zero())
            .map(move |(i, v)| (i % w, i / w, *v))
    }

    /// Index of the last all-invalid row above the first row containing a
    /// valid pixel: `Some(-1)` when row 0 already has ground, `None` when no
    /// pixel is valid.
    pub fn vanishing_row(&self) -> Option<isize> {
        let first_valid =
            (0..self.height).find(|&y| (0..self.width).any(|x| self.is_valid(x, y)))?;
        Some(first_valid as isize - 1)
    }
}

/// Dense ground-slope map in radians with an explicit validity mask.
///
/// Zero is a meaningful slope, so invalid pixels are tracked separately
/// rather than through a sentinel value. Valid angles lie within ±π/6.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeMap<S> {
    width: usize,
    height: usize,
    angles: Vec<S>,
    valid: Vec<bool>,
}

impl<S: Scalar> SlopeMap<S> {
    pub fn new(width: usize, height: usize, angles: Vec<S>, valid: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("slope map dimensions must be >= 1"));
        }
        if angles.len() != width * height || valid.len() != width * height {
            return Err(Error::dims(format!(
                "slope map expects {} angles and flags for {}x{}, got {} and {}",
                width * height,
                width,
                height,
                angles.len(),
                valid.len()
            )));
        }
        for i in 0..angles.len() {
            if valid[i] && !slope_range_ok(angles[i]) {
                return Err(Error::validation(format!(
                    "slope {} rad at pixel ({}, {}) lies outside the admissible range [-pi/6, pi/6]",
                    angles[i],
                    i % width,
                    i / width
                )));
            }
        }
        Ok(Self {
            width,
            height,
            angles,
            valid,
        })
    }

    /// Map with every pixel valid and set to `angle`.
    pub fn uniform(width: usize, height: usize, angle: S) -> Result<Self> {
        Self::new(
            width,
            height,
            vec![angle; width * height],
            vec![true; width * height],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Slope angle at a pixel, `None` when the pixel is invalid.
    pub fn angle_at(&self, x: usize, y: usize) -> Option<S> {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        let i = y * self.width + x;
        self.valid[i].then(|| self.angles[i])
    }

    pub fn angles(&self) -> &[S] {
        &self.angles
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Per-pixel ground-membership weight in `[0, 1]`, used as the blend
/// coefficient between ground depth and residual depth.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMap<S> {
    width: usize,
    height: usize,
    weights: Vec<S>,
}

impl<S: Scalar> AttentionMap<S> {
    pub fn new(width: usize, height: usize, weights: Vec<S>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("attention map dimensions must be >= 1"));
        }
        if weights.len() != width * height {
            return Err(Error::dims(format!(
                "attention map expects {} weights for {}x{}, got {}",
                width * height,
                width,
                height,
                weights.len()
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < S::zero() || w > S::one() {
                return Err(Error::validation(format!(
                    "attention weight {} at pixel ({}, {}) lies outside [0, 1]",
                    w,
                    i % width,
                    i / width
                )));
            }
        }
        Ok(Self {
            width,
            height,
            weights,
        })
    }

    pub fn filled(width: usize, height: usize, weight: S) -> Result<Self> {
        Self::new(width, height, vec![weight; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> S {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.weights[y * self.width + x]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }
}

/// Nearest pixel index for continuous coordinates, `None` when it falls
/// outside the map.
pub fn pixel_index<S: Scalar>(u: S, v: S, width: usize, height: usize) -> Option<(usize, usize)> {
    if !u.is_finite() || !v.is_finite() {
        return None;
    }
    let x = u.round();
    let y = v.round();
    if x < S::zero() || y < S::zero() {
        return None;
    }
    let (x, y) = (x.to_usize()?, y.to_usize()?);
    (x < width && y < height).then_some((x, y))
}
