//! Synthetic terrain ground truth: the independent verifier for the
//! closed-form ground-depth formulas.
//!
//! A scene is a camera over a height field `y_w = f(z_w)` that varies only
//! along the world z axis (a road profile; lateral variation is
//! unobservable to the slope definition, which lives in the y–z plane).
//! Depth is computed by geometric ray intersection — normalized ray
//! direction, world-space surface solve, reprojection into the camera
//! frame — rather than by the closed-form expressions under test. Plane
//! and ramp profiles intersect analytically; sine profiles are ray-marched
//! and bisection-refined.
//!
//! The true slope map uses the chord anchored at the optical center's
//! projection onto the planar ground: a surface hit at height `y_w` and
//! camera depth `z_c` has `α = arctan((y_w − h)/z_c)`. Feeding that map
//! back through the sloped-ground formula reproduces the oracle depth
//! identically, which is the composition every verification rides on.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::camera::{intrinsics_matrix, CameraModel};
use crate::error::{Error, Result};
use crate::map::{max_slope_angle, DepthMap, SlopeMap};
use crate::math::{axis_angle_rotation, mat_vec, normalize};
use crate::scalar::{deg_to_rad, near_zero, Scalar};

/// Parametric world height field `y_w = f(z_w)`, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerrainProfile<S> {
    /// Constant height: `y_w = height`.
    Plane { height: S },
    /// Linear ramp along z: `y_w = height + gradient·z_w`.
    Ramp { height: S, gradient: S },
    /// Sinusoidal undulation: `y_w = height + amplitude·sin(2π·z_w/wavelength)`.
    Sine {
        height: S,
        amplitude: S,
        wavelength: S,
    },
}

impl<S: Scalar> TerrainProfile<S> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TerrainProfile::Plane { height } => {
                if !height.is_finite() {
                    return Err(Error::validation("plane height must be finite"));
                }
            }
            TerrainProfile::Ramp { height, gradient } => {
                if !height.is_finite() || !gradient.is_finite() {
                    return Err(Error::validation("ramp parameters must be finite"));
                }
            }
            TerrainProfile::Sine {
                height,
                amplitude,
                wavelength,
            } => {
                if !height.is_finite() || !amplitude.is_finite() || !wavelength.is_finite() {
                    return Err(Error::validation("sine parameters must be finite"));
                }
                if amplitude < S::zero() {
                    return Err(Error::validation(format!(
                        "sine amplitude must be non-negative, got {amplitude}"
                    )));
                }
                if wavelength <= S::zero() {
                    return Err(Error::validation(format!(
                        "sine wavelength must be positive, got {wavelength}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Surface height at world z.
    pub fn height_at(&self, z_w: S) -> S {
        match *self {
            TerrainProfile::Plane { height } => height,
            TerrainProfile::Ramp { height, gradient } => height + gradient * z_w,
            TerrainProfile::Sine {
                height,
                amplitude,
                wavelength,
            } => height + amplitude * (S::of(2.0) * S::PI() * z_w / wavelength).sin(),
        }
    }
}

/// A renderable verification scene.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleScene<S> {
    pub cam: CameraModel<S>,
    pub terrain: TerrainProfile<S>,
    pub width: usize,
    pub height: usize,
    /// Hits beyond this camera depth become sentinels. `None` disables
    /// truncation, which is only meaningful for the analytically
    /// intersected profiles; marched profiles need a bound.
    pub max_depth: Option<S>,
    /// March step in meters for profiles without an analytic intersection.
    pub step: S,
}

impl<S: Scalar> OracleScene<S> {
    pub fn new(
        cam: CameraModel<S>,
        terrain: TerrainProfile<S>,
        width: usize,
        height: usize,
        max_depth: Option<S>,
        step: S,
    ) -> Result<Self> {
        terrain.validate()?;
        if width == 0 || height == 0 {
            return Err(Error::validation("scene dimensions must be >= 1"));
        }
        if !(step > S::zero() && step.is_finite()) {
            return Err(Error::validation(format!(
                "march step must be positive and finite, got {step}"
            )));
        }
        if let Some(md) = max_depth {
            // md > step written to also reject a NaN bound
            if md.partial_cmp(&step) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::validation(format!(
                    "max depth {md} must exceed the march step {step}"
                )));
            }
        } else if matches!(terrain, TerrainProfile::Sine { amplitude, .. } if amplitude > S::zero())
        {
            return Err(Error::validation(
                "marched terrain needs a finite max depth".to_string(),
            ));
        }
        Ok(Self {
            cam,
            terrain,
            width,
            height,
            max_depth,
            step,
        })
    }
}

/// A ray–terrain intersection: camera depth and surface height.
#[derive(Debug, Clone, Copy)]
struct Hit<S> {
    z_c: S,
    y_w: S,
}

/// Bisection refinement width in meters.
const REFINE_WIDTH_M: f64 = 1e-9;

fn intersect<S: Scalar>(scene: &OracleScene<S>, u: S, v: S) -> Option<Hit<S>> {
    let cam = &scene.cam;
    let origin = *cam.center();
    let dir = mat_vec(cam.ray_matrix(), &[u, v, S::one()]);
    let dn = normalize(&dir);

    // Arc-length parameter t along dn; reprojection recovers camera depth.
    let t = match scene.terrain {
        TerrainProfile::Plane { height } => intersect_constant_height(&origin, &dir, &dn, height)?,
        TerrainProfile::Sine {
            height, amplitude, ..
        } if amplitude == S::zero() => intersect_constant_height(&origin, &dir, &dn, height)?,
        TerrainProfile::Ramp { height, gradient } => {
            // o_y + t·dn_y = height + g·(o_z + t·dn_z)
            let denom_raw = dir[1] - gradient * dir[2];
            if near_zero(denom_raw) {
                return None;
            }
            let t = (height + gradient * origin[2] - origin[1]) / (dn[1] - gradient * dn[2]);
            if t <= S::zero() || !t.is_finite() {
                return None;
            }
            t
        }
        TerrainProfile::Sine { .. } => march(scene, &origin, &dn, crate::math::norm(&dir))?,
    };

    let p = [
        origin[0] + t * dn[0],
        origin[1] + t * dn[1],
        origin[2] + t * dn[2],
    ];
    let z_c = cam.camera_depth(&p);
    if z_c <= S::zero() || !z_c.is_finite() {
        return None;
    }
    if let Some(md) = scene.max_depth {
        if z_c > md {
            return None;
        }
    }
    Some(Hit { z_c, y_w: p[1] })
}

fn intersect_constant_height<S: Scalar>(
    origin: &[S; 3],
    dir_raw: &[S; 3],
    dn: &[S; 3],
    height: S,
) -> Option<S> {
    // Shares the vanishing-line classification with the closed-form path
    // (the unnormalized y coefficient), but solves in world space with the
    // normalized direction.
    if near_zero(dir_raw[1]) {
        return None;
    }
    let t = (height - origin[1]) / dn[1];
    (t > S::zero() && t.is_finite()).then_some(t)
}

/// First sign change of `f(t) = ray_y(t) − surface_y(t)` marching in steps
/// of `scene.step`, refined by bisection to [`REFINE_WIDTH_M`].
fn march<S: Scalar>(
    scene: &OracleScene<S>,
    origin: &[S; 3],
    dn: &[S; 3],
    dir_norm: S,
) -> Option<S> {
    let md = scene
        .max_depth
        .expect("marched scenes are validated to carry a max depth");
    let surface = |t: S| {
        let z_w = origin[2] + t * dn[2];
        origin[1] + t * dn[1] - scene.terrain.height_at(z_w)
    };
    // t is arc length and z_c = t / |dir_raw|, so t_max = md·|dir_raw|
    // exactly covers the depth bound; the z_c cut afterwards prunes the
    // boundary case.
    let t_max = md * dir_norm;
    let mut t_prev = S::zero();
    let mut f_prev = surface(t_prev);
    if f_prev == S::zero() {
        // ray starts on the surface: the optical center itself is not a hit
        t_prev = scene.step * S::of(1e-3);
        f_prev = surface(t_prev);
    }
    let mut t = scene.step;
    while t_prev < t_max {
        let f = surface(t);
        if f == S::zero() {
            return Some(t);
        }
        if (f_prev < S::zero()) != (f < S::zero()) {
            return Some(bisect(&surface, t_prev, t));
        }
        t_prev = t;
        f_prev = f;
        t = t + scene.step;
    }
    None
}

fn bisect<S: Scalar>(f: &impl Fn(S) -> S, mut lo: S, mut hi: S) -> S {
    let width = S::of(REFINE_WIDTH_M);
    let mut f_lo = f(lo);
    for _ in 0..200 {
        if hi - lo <= width {
            break;
        }
        let mid = (lo + hi) * S::of(0.5);
        let f_mid = f(mid);
        if f_mid == S::zero() {
            return mid;
        }
        if (f_lo < S::zero()) != (f_mid < S::zero()) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    (lo + hi) * S::of(0.5)
}

/// Renders the scene's ground-truth depth map: per pixel, the smallest
/// camera depth at which the ray meets the terrain, sentinel `0` when
/// there is no hit before `max_depth`.
pub fn oracle_ground_depth<S: Scalar>(scene: &OracleScene<S>) -> DepthMap<S> {
    let (w, h) = (scene.width, scene.height);
    let mut data = vec![S::zero(); w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let v = S::of_usize(y);
        for (x, out) in row.iter_mut().enumerate() {
            if let Some(hit) = intersect(scene, S::of_usize(x), v) {
                *out = hit.z_c;
            }
        }
    });
    DepthMap::from_raw(w, h, data)
}

/// Renders the scene's true slope map: `α = arctan((y_w − h)/z_c)` at each
/// terrain hit, invalid where the ray misses or the chord angle leaves the
/// admissible ±π/6 range.
pub fn oracle_slope_map<S: Scalar>(scene: &OracleScene<S>) -> SlopeMap<S> {
    oracle_render(scene).1
}

/// Depth and slope from a single render pass.
pub fn oracle_render<S: Scalar>(scene: &OracleScene<S>) -> (DepthMap<S>, SlopeMap<S>) {
    let (w, h) = (scene.width, scene.height);
    let ground_h = scene.cam.ground_height();
    let bound = max_slope_angle::<S>();
    let mut depth = vec![S::zero(); w * h];
    let mut angles = vec![S::zero(); w * h];
    let mut valid = vec![false; w * h];
    depth
        .par_chunks_mut(w)
        .zip(angles.par_chunks_mut(w))
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, ((depth_row, angle_row), valid_row))| {
            let v = S::of_usize(y);
            for x in 0..w {
                let Some(hit) = intersect(scene, S::of_usize(x), v) else {
                    continue;
                };
                depth_row[x] = hit.z_c;
                let alpha = ((hit.y_w - ground_h) / hit.z_c).atan();
                if alpha.abs() <= bound {
                    angle_row[x] = alpha;
                    valid_row[x] = true;
                }
            }
        });
    (
        DepthMap::from_raw(w, h, depth),
        SlopeMap::new(w, h, angles, valid).expect("oracle slopes are range-checked"),
    )
}

/// Draws `n` samples uniformly (with replacement) from the scene's valid
/// oracle pixels, with their exact depths. Reproducible: the sample set is
/// a pure function of the scene and `seed`.
pub fn oracle_sparse_samples<S: Scalar>(
    scene: &OracleScene<S>,
    n: usize,
    seed: u64,
) -> Result<crate::groundgeom::SparseDepth<S>> {
    if n == 0 {
        return Err(Error::validation("sample count must be >= 1"));
    }
    let depth = oracle_ground_depth(scene);
    let valid: Vec<(usize, usize, S)> = depth.iter_valid().collect();
    if valid.is_empty() {
        return Err(Error::numeric(
            "scene has no valid oracle pixels to sample".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let (x, y, z) = valid[rng.random_range(0..valid.len())];
            crate::groundgeom::SparseSample {
                u: S::of_usize(x),
                v: S::of_usize(y),
                z,
            }
        })
        .collect();
    crate::groundgeom::SparseDepth::new(samples)
}

/// Random camera covering KITTI/DDAD-like rigs, for randomized
/// verification: focal lengths in [50, 1500] px, principal point anywhere
/// in frame, rotation angle up to 10°, ground height in [0.5, 2.5] m, and
/// a translation re-drawn until the camera sits at least 0.25 m above the
/// ground plane.
pub fn random_camera<S: Scalar>(rng: &mut impl Rng, width: usize, height: usize) -> CameraModel<S> {
    let fx = rng.random_range(50.0..=1500.0);
    let fy = rng.random_range(50.0..=1500.0);
    let cx = rng.random_range(0.0..width as f64);
    let cy = rng.random_range(0.0..height as f64);
    let k = intrinsics_matrix(S::of(fx), S::of(fy), S::of(cx), S::of(cy));

    let axis = loop {
        let a = [
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        ];
        let n2: f64 = a.iter().map(|x| x * x).sum();
        if n2 > 1e-3 {
            break [S::of(a[0]), S::of(a[1]), S::of(a[2])];
        }
    };
    let angle = deg_to_rad(S::of(rng.random_range(-10.0..=10.0)));
    let r = axis_angle_rotation(axis, angle);

    let h = S::of(rng.random_range(0.5..=2.5));
    loop {
        let t = [
            S::of(rng.random_range(-1.0..=1.0)),
            S::of(rng.random_range(-1.0..=1.0)),
            S::of(rng.random_range(-1.0..=1.0)),
        ];
        let cam = CameraModel::new(k, r, t, h).expect("generated rotation is orthonormal");
        // keep the optical center meaningfully above the ground plane
        if h - cam.center()[1] >= S::of(0.25) {
            return cam;
        }
    }
}
