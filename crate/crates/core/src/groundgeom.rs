//! Ground-depth generation and ground-slope supervision.
//!
//! With `c(u, v) = a₂₁u + a₂₂v + a₂₃` (see
//! [`CameraModel::ground_coeff`]) and camera center `B = (b₁, b₂, b₃)`,
//! the ray through a pixel meets
//!
//! * the planar ground `y_w = h` at depth `z_c = (h − b₂) / c(u, v)`, and
//! * the sloped ground `y_w = tan(α)·z_c + h` at depth
//!   `z_c = (b₂ − h) / (tan(α) − c(u, v))`,
//!
//! which reduces to the planar case at `α = 0`. Pixels whose ray cannot
//! meet the surface in front of the camera — the vanishing line and above,
//! or a ray parallel to the surface direction — receive the sentinel depth
//! `0`. Inverting the sloped form at a known depth gives the slope angle
//!
//! ```text
//! α = arctan((b₂ − h)/z_c + c(u, v))
//! ```
//!
//! which is how sparse LiDAR depth turns into slope supervision: each
//! sample maps to the discrete slope class nearest its α.
//!
//! Sign convention: `α > 0` means the surface's world `y` grows with
//! camera depth. No uphill/downhill label is attached; under a y-down rig
//! the physical reading is the opposite of a y-up one.

use rayon::prelude::*;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::map::{max_slope_angle, pixel_index, DepthMap, SlopeMap};
use crate::scalar::{near_zero, Scalar};

/// Default relative tolerance for [`ground_consistency_mask`] (3%).
pub const DEFAULT_CONSISTENCY_REL_TOL: f64 = 0.03;

/// A sparse depth sample at continuous pixel coordinates, depth in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseSample<S> {
    pub u: S,
    pub v: S,
    pub z: S,
}

/// Sparse ground-truth depth, e.g. projected LiDAR returns on ground
/// surface points. Every sample has strictly positive finite depth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseDepth<S> {
    samples: Vec<SparseSample<S>>,
}

impl<S: Scalar> SparseDepth<S> {
    pub fn new(samples: Vec<SparseSample<S>>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !s.u.is_finite() || !s.v.is_finite() {
                return Err(Error::validation(format!(
                    "sparse sample {i} has non-finite pixel coordinates"
                )));
            }
            if !s.z.is_finite() || s.z <= S::zero() {
                return Err(Error::validation(format!(
                    "sparse sample {i} has non-positive depth {}",
                    s.z
                )));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[SparseSample<S>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Checks that every sample's nearest pixel lies inside `width`×`height`.
    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        for (i, s) in self.samples.iter().enumerate() {
            if pixel_index(s.u, s.v, width, height).is_none() {
                return Err(Error::validation(format!(
                    "sparse sample {i} at ({}, {}) falls outside the {width}x{height} map",
                    s.u, s.v
                )));
            }
        }
        Ok(())
    }
}

/// The discrete slope-angle set `{τ_i}`: strictly increasing, all within
/// ±π/6.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeBinning<S> {
    taus: Vec<S>,
}

impl<S: Scalar> SlopeBinning<S> {
    pub fn new(taus: Vec<S>) -> Result<Self> {
        if taus.len() < 2 {
            return Err(Error::validation(format!(
                "slope binning needs at least 2 angles, got {}",
                taus.len()
            )));
        }
        let bound = max_slope_angle::<S>() + S::of(1e-6);
        for (i, &t) in taus.iter().enumerate() {
            if !t.is_finite() || t.abs() > bound {
                return Err(Error::validation(format!(
                    "slope bin {i} ({t} rad) lies outside [-pi/6, pi/6]"
                )));
            }
            if i > 0 && t <= taus[i - 1] {
                return Err(Error::validation(
                    "slope bins must be strictly increasing".to_string(),
                ));
            }
        }
        Ok(Self { taus })
    }

    /// `count` angles evenly spaced over `[min, max]` radians, inclusive.
    pub fn evenly_spaced(min: S, max: S, count: usize) -> Result<Self> {
        // min < max written to also reject NaN endpoints
        if count < 2 || min.partial_cmp(&max) != Some(std::cmp::Ordering::Less) {
            return Err(Error::validation(format!(
                "even binning needs count >= 2 and min < max, got count {count}, [{min}, {max}]"
            )));
        }
        let step = (max - min) / S::of_usize(count - 1);
        let taus = (0..count).map(|i| min + step * S::of_usize(i)).collect();
        Self::new(taus)
    }

    pub fn taus(&self) -> &[S] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the angle nearest `alpha`, ties resolved to the lower
    /// index. The flag is set when `alpha` falls outside the binning range
    /// extended by half the end gaps, i.e. the sample was clamped to a
    /// boundary class rather than genuinely belonging to it.
    pub fn nearest_class(&self, alpha: S) -> (usize, bool) {
        let taus = &self.taus;
        let n = taus.len();
        let mut best = 0usize;
        let mut best_dist = (alpha - taus[0]).abs();
        for (i, &t) in taus.iter().enumerate().skip(1) {
            let d = (alpha - t).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        let half = S::of(0.5);
        let lo = taus[0] - (taus[1] - taus[0]) * half;
        let hi = taus[n - 1] + (taus[n - 1] - taus[n - 2]) * half;
        (best, alpha < lo || alpha > hi)
    }
}

/// 11 angles evenly distributed over [−5°, +5°], the default binning.
impl<S: Scalar> Default for SlopeBinning<S> {
    fn default() -> Self {
        let five = crate::scalar::deg_to_rad(S::of(5.0));
        Self::evenly_spaced(-five, five, 11).expect("default binning is valid")
    }
}

/// A slope supervision label: pixel position, nearest slope class, the
/// measured angle (radians), and whether it was clamped into the binning
/// range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeLabel<S> {
    pub u: S,
    pub v: S,
    pub class: usize,
    pub alpha: S,
    pub clamped: bool,
}

/// Dense per-pixel probability distributions over the slope classes.
///
/// Stored row-major by pixel with the per-class probabilities contiguous:
/// `probs[(y*width + x)*classes + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeProbabilities<S> {
    width: usize,
    height: usize,
    classes: usize,
    probs: Vec<S>,
}

impl<S: Scalar> SlopeProbabilities<S> {
    pub fn new(width: usize, height: usize, classes: usize, probs: Vec<S>) -> Result<Self> {
        if width == 0 || height == 0 || classes == 0 {
            return Err(Error::validation(
                "slope probabilities need non-zero dimensions and class count".to_string(),
            ));
        }
        if probs.len() != width * height * classes {
            return Err(Error::dims(format!(
                "slope probabilities expect {} values for {}x{}x{}, got {}",
                width * height * classes,
                width,
                height,
                classes,
                probs.len()
            )));
        }
        let this = Self {
            width,
            height,
            classes,
            probs,
        };
        for y in 0..height {
            for x in 0..width {
                this.check_pixel(x, y)?;
            }
        }
        Ok(this)
    }

    fn check_pixel(&self, x: usize, y: usize) -> Result<()> {
        let p = self.at(x, y);
        let mut sum = S::zero();
        for &pi in p {
            if !pi.is_finite() || pi < S::zero() || pi > S::one() {
                return Err(Error::validation(format!(
                    "probability {pi} at pixel ({x}, {y}) lies outside [0, 1]"
                )));
            }
            sum = sum + pi;
        }
        if (sum - S::one()).abs() > S::of(1e-6) {
            return Err(Error::validation(format!(
                "probabilities at pixel ({x}, {y}) sum to {sum}, beyond 1e-6 from 1"
            )));
        }
        Ok(())
    }

    /// Per-class probabilities at a pixel.
    pub fn at(&self, x: usize, y: usize) -> &[S] {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        let base = (y * self.width + x) * self.classes;
        &self.probs[base..base + self.classes]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn classes(&self) -> usize {
        self.classes
    }
}

/// Closed-form depth of the ray–plane intersection for every pixel of a
/// `width`×`height` image: `z_c = (h − b₂)/c(u, v)`.
///
/// Pixels at the vanishing line (`c` within 1e-12 of zero) or looking above
/// it (`z_c <= 0`) receive the sentinel `0`.
pub fn planar_ground_depth<S: Scalar>(
    cam: &CameraModel<S>,
    width: usize,
    height: usize,
) -> DepthMap<S> {
    let mut data = vec![S::zero(); width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let v = S::of_usize(y);
        for (x, out) in row.iter_mut().enumerate() {
            *out = planar_depth_at(cam, S::of_usize(x), v);
        }
    });
    DepthMap::from_raw(width, height, data)
}

fn planar_depth_at<S: Scalar>(cam: &CameraModel<S>, u: S, v: S) -> S {
    let denom = cam.ground_coeff(u, v);
    if near_zero(denom) {
        return S::zero();
    }
    let z = (cam.ground_height() - cam.center()[1]) / denom;
    if z > S::zero() && z.is_finite() {
        z
    } else {
        S::zero()
    }
}

/// Depth of the ray's intersection with the sloped ground
/// `y_w = tan(α)·z_c + h`, using the per-pixel slope map:
/// `z_c = (b₂ − h)/(tan(α) − c(u, v))`.
///
/// The output has the slope map's dimensions. Sentinel `0` where the slope
/// pixel is invalid, the denominator vanishes (ray parallel to the surface
/// direction), or the intersection lies behind the camera. An all-zero
/// slope map reproduces [`planar_ground_depth`] bit for bit.
pub fn undulated_ground_depth<S: Scalar>(cam: &CameraModel<S>, slope: &SlopeMap<S>) -> DepthMap<S> {
    let width = slope.width();
    let height = slope.height();
    let b2 = cam.center()[1];
    let h = cam.ground_height();
    let mut data = vec![S::zero(); width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let v = S::of_usize(y);
        for (x, out) in row.iter_mut().enumerate() {
            let Some(alpha) = slope.angle_at(x, y) else {
                continue;
            };
            let denom = alpha.tan() - cam.ground_coeff(S::of_usize(x), v);
            if near_zero(denom) {
                continue;
            }
            let z = (b2 - h) / denom;
            if z > S::zero() && z.is_finite() {
                *out = z;
            }
        }
    });
    DepthMap::from_raw(width, height, data)
}

/// Ground-slope angle implied by a known depth at a pixel:
/// `α = arctan((b₂ − h)/z_c + c(u, v))`. This inverts
/// [`undulated_ground_depth`] exactly.
pub fn slope_from_depth<S: Scalar>(cam: &CameraModel<S>, u: S, v: S, z_c: S) -> Result<S> {
    if !z_c.is_finite() || z_c <= S::zero() {
        return Err(Error::numeric(format!(
            "slope inversion needs positive finite depth, got {z_c}"
        )));
    }
    let b2 = cam.center()[1];
    let h = cam.ground_height();
    Ok(((b2 - h) / z_c + cam.ground_coeff(u, v)).atan())
}

/// Converts sparse ground-surface depth into per-sample slope classes: the
/// angle from [`slope_from_depth`], assigned to the nearest `τ_i` (ties to
/// the lower index). Samples whose angle falls outside the binning range
/// are clamped to the boundary class and flagged rather than dropped, so
/// histogram totals match sample counts.
pub fn slope_labels_from_sparse<S: Scalar>(
    cam: &CameraModel<S>,
    sparse: &SparseDepth<S>,
    bins: &SlopeBinning<S>,
) -> Result<Vec<SlopeLabel<S>>> {
    let mut labels = Vec::with_capacity(sparse.len());
    for s in sparse.samples() {
        let alpha = slope_from_depth(cam, s.u, s.v, s.z)?;
        let (class, clamped) = bins.nearest_class(alpha);
        labels.push(SlopeLabel {
            u: s.u,
            v: s.v,
            class,
            alpha,
            clamped,
        });
    }
    Ok(labels)
}

/// Soft slope estimate per pixel: `α̂ = Σ p_i·τ_i`. Every output pixel is
/// valid and lies within `[τ_min, τ_max]` by convexity.
pub fn soft_slope<S: Scalar>(
    probs: &SlopeProbabilities<S>,
    bins: &SlopeBinning<S>,
) -> Result<SlopeMap<S>> {
    if probs.classes() != bins.len() {
        return Err(Error::dims(format!(
            "probabilities carry {} classes but the binning has {}",
            probs.classes(),
            bins.len()
        )));
    }
    let (w, h) = (probs.width(), probs.height());
    let mut angles = vec![S::zero(); w * h];
    for y in 0..h {
        for x in 0..w {
            let p = probs.at(x, y);
            let mut alpha = S::zero();
            let mut sum = S::zero();
            for (pi, tau) in p.iter().zip(bins.taus()) {
                alpha = alpha + *pi * *tau;
                sum = sum + *pi;
            }
            if (sum - S::one()).abs() > S::of(1e-6) {
                return Err(Error::numeric(format!(
                    "probabilities at pixel ({x}, {y}) sum to {sum}, beyond 1e-6 from 1"
                )));
            }
            angles[y * w + x] = alpha;
        }
    }
    SlopeMap::new(w, h, angles, vec![true; w * h])
}

/// Marks each sparse sample consistent with a ground-depth map: the pixel
/// must hold a valid ground depth and satisfy
/// `|z_ground − z_sample| / z_sample < rel_tol`.
pub fn ground_consistency_mask<S: Scalar>(
    ground: &DepthMap<S>,
    sparse: &SparseDepth<S>,
    rel_tol: S,
) -> Result<Vec<bool>> {
    if !(rel_tol > S::zero() && rel_tol.is_finite()) {
        return Err(Error::validation(format!(
            "relative tolerance must be positive and finite, got {rel_tol}"
        )));
    }
    sparse.check_bounds(ground.width(), ground.height())?;
    Ok(sparse
        .samples()
        .iter()
        .map(|s| {
            let (x, y) = pixel_index(s.u, s.v, ground.width(), ground.height())
                .expect("bounds checked above");
            let zg = ground.get(x, y);
            zg > S::zero() && ((zg - s.z).abs() / s.z) < rel_tol
        })
        .collect())
}

/// Per-class label counts; the sum equals the number of labels.
pub fn slope_histogram<S: Scalar>(labels: &[SlopeLabel<S>], bins: &SlopeBinning<S>) -> Vec<u64> {
    let mut counts = vec![0u64; bins.len()];
    for l in labels {
        counts[l.class.min(bins.len() - 1)] += 1;
    }
    counts
}
