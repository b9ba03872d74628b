//! Pinhole camera model and coordinate transforms.
//!
//! The projection of a world point `p` to pixel `(u, v)` at camera-frame
//! depth `z_c` follows
//!
//! ```text
//! z_c · [u, v, 1]ᵀ = K (R p + T)
//! ```
//!
//! Rewriting gives the ray through pixel `(u, v)` parameterized by `z_c`:
//!
//! ```text
//! p(z_c) = A [u, v, 1]ᵀ z_c + B,    A = R⁻¹ K⁻¹,    B = R⁻¹(−T)
//! ```
//!
//! `B` is the camera optical center in world coordinates. The second rows of
//! `A` and `B` drive every ground-depth formula in [`crate::groundgeom`],
//! so both derived quantities are computed once at construction and
//! validated against their defining identities.
//!
//! Conventions: continuous pixel coordinates with the pixel center at
//! integer indices, `u` along columns, `v` along rows. The world frame
//! places the planar ground at `y_w = h` with normal `(0, 1, 0)`; for
//! KITTI-style rigs (y pointing down toward the ground), `h = 1.65` puts
//! the ground 1.65 m from the optical center.

use crate::error::{Error, Result};
use crate::map::DepthMap;
use crate::math::{self, Mat3, Vec3};
use crate::metrics::PointCloud;
use crate::scalar::Scalar;

/// A point in the world coordinate system, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> WorldPoint<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    pub fn as_array(&self) -> Vec3<S> {
        [self.x, self.y, self.z]
    }
}

impl<S: Scalar> From<Vec3<S>> for WorldPoint<S> {
    fn from(v: Vec3<S>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Validated pinhole camera: intrinsics `K`, extrinsics `(R, T)`, planar
/// ground height `h`, and the derived ray matrices `A = R⁻¹K⁻¹`,
/// `B = R⁻¹(−T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel<S> {
    k: Mat3<S>,
    r: Mat3<S>,
    t: Vec3<S>,
    h: S,
    a: Mat3<S>,
    b: Vec3<S>,
}

impl<S: Scalar> CameraModel<S> {
    /// Builds and validates a camera.
    ///
    /// `K` must be upper-triangular with positive diagonal and a unit
    /// `K[2][2]` (so the ray parameter equals camera-frame depth in meters);
    /// `R` must be a rotation (`RᵀR = I`, `det R = 1`, each entry within
    /// the scalar's validation tolerance). The derived `A` and `B` are
    /// checked against `K·R·A = I` and `R·B + T = 0` before the camera is
    /// returned.
    pub fn new(k: Mat3<S>, r: Mat3<S>, t: Vec3<S>, h: S) -> Result<Self> {
        for (name, m) in [("K", &k), ("R", &r)] {
            for row in m {
                for &x in row {
                    if !x.is_finite() {
                        return Err(Error::validation(format!(
                            "{name} contains a non-finite entry"
                        )));
                    }
                }
            }
        }
        if t.iter().any(|x| !x.is_finite()) || !h.is_finite() {
            return Err(Error::validation("T and h must be finite"));
        }
        validate_intrinsics(&k)?;
        validate_rotation(&r)?;

        // General inverses rather than the transpose shortcut for R: the
        // derived identities then hold to machine precision even when the
        // input rotation only meets the validation tolerance.
        let k_inv = math::inverse(&k).ok_or_else(|| Error::validation("K is not invertible"))?;
        let r_inv = math::inverse(&r).ok_or_else(|| Error::validation("R is not invertible"))?;
        let a = math::mat_mul(&r_inv, &k_inv);
        let b = math::mat_vec(&r_inv, &math::neg(&t));

        let cam = Self { k, r, t, h, a, b };
        cam.check_derived()?;
        Ok(cam)
    }

    fn check_derived(&self) -> Result<()> {
        let tol = S::validation_tol();
        let kra = math::mat_mul(&math::mat_mul(&self.k, &self.r), &self.a);
        if math::max_abs_diff(&kra, &math::identity()) > tol {
            return Err(Error::validation(
                "derived ray matrix violates K*R*A = I".to_string(),
            ));
        }
        let rb = math::mat_vec(&self.r, &self.b);
        for (rb_i, t_i) in rb.iter().zip(&self.t) {
            if (*rb_i + *t_i).abs() > tol {
                return Err(Error::validation(
                    "derived camera center violates R*B + T = 0".to_string(),
                ));
            }
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> &Mat3<S> {
        &self.k
    }

    pub fn rotation(&self) -> &Mat3<S> {
        &self.r
    }

    pub fn translation(&self) -> &Vec3<S> {
        &self.t
    }

    /// Planar ground height `h` in meters.
    pub fn ground_height(&self) -> S {
        self.h
    }

    /// The derived ray matrix `A = R⁻¹K⁻¹`.
    pub fn ray_matrix(&self) -> &Mat3<S> {
        &self.a
    }

    /// The camera optical center in world coordinates, `B = R⁻¹(−T)`.
    pub fn center(&self) -> &Vec3<S> {
        &self.b
    }

    /// Second-row ray coefficient `a₂₁u + a₂₂v + a₂₃`: the rate at which
    /// the ray's world `y` grows per meter of camera depth. Shared by the
    /// planar and sloped ground-depth formulas so their reductions agree
    /// bit for bit.
    pub fn ground_coeff(&self, u: S, v: S) -> S {
        self.a[1][0] * u + self.a[1][1] * v + self.a[1][2]
    }

    /// Camera-frame depth of a world point (third component of `Rp + T`).
    pub(crate) fn camera_depth(&self, p: &Vec3<S>) -> S {
        self.r[2][0] * p[0] + self.r[2][1] * p[1] + self.r[2][2] * p[2] + self.t[2]
    }

    /// Projects a world point to `(u, v, z_c)`.
    ///
    /// Fails when the point lies at or behind the optical center
    /// (`z_c <= 0`).
    pub fn project(&self, p: &WorldPoint<S>) -> Result<(S, S, S)> {
        if !p.x.is_finite() || !p.y.is_finite() || !p.z.is_finite() {
            return Err(Error::validation("world point must be finite"));
        }
        let pc = [
            self.r[0][0] * p.x + self.r[0][1] * p.y + self.r[0][2] * p.z + self.t[0],
            self.r[1][0] * p.x + self.r[1][1] * p.y + self.r[1][2] * p.z + self.t[1],
            self.camera_depth(&p.as_array()),
        ];
        let z_c = pc[2];
        if z_c <= S::zero() {
            return Err(Error::numeric(format!(
                "point projects behind the camera (z_c = {z_c})"
            )));
        }
        let u = (self.k[0][0] * pc[0] + self.k[0][1] * pc[1] + self.k[0][2] * pc[2]) / z_c;
        let v = (self.k[1][1] * pc[1] + self.k[1][2] * pc[2]) / z_c;
        Ok((u, v, z_c))
    }

    /// World point on the ray through pixel `(u, v)` at camera depth `z_c`.
    pub fn ray_point(&self, u: S, v: S, z_c: S) -> Result<WorldPoint<S>> {
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::validation("pixel coordinates must be finite"));
        }
        if !z_c.is_finite() || z_c <= S::zero() {
            return Err(Error::numeric(format!(
                "ray depth must be positive and finite, got {z_c}"
            )));
        }
        Ok(self.ray_point_unchecked(u, v, z_c))
    }

    pub(crate) fn ray_point_unchecked(&self, u: S, v: S, z_c: S) -> WorldPoint<S> {
        let a = &self.a;
        WorldPoint::new(
            (a[0][0] * u + a[0][1] * v + a[0][2]) * z_c + self.b[0],
            (a[1][0] * u + a[1][1] * v + a[1][2]) * z_c + self.b[1],
            (a[2][0] * u + a[2][1] * v + a[2][2]) * z_c + self.b[2],
        )
    }

    /// The ray through pixel `(u, v)`.
    pub fn ray(&self, u: S, v: S) -> PixelRay<'_, S> {
        PixelRay { cam: self, u, v }
    }

    /// Unprojects every valid pixel of a depth map to a world-space point
    /// cloud. Sentinel pixels are skipped; an all-invalid map yields an
    /// empty cloud.
    pub fn unproject_depth_map(&self, depth: &DepthMap<S>) -> PointCloud<S> {
        let mut points = Vec::with_capacity(depth.valid_count());
        for (x, y, z) in depth.iter_valid() {
            let p = self.ray_point_unchecked(S::of_usize(x), S::of_usize(y), z);
            points.push(p.as_array());
        }
        PointCloud::from_points_unchecked(points)
    }

    /// Camera with the pixel grid rescaled by `(s_x, s_y)`: the projection
    /// of any fixed world point moves from `(u, v)` to `(s_x·u, s_y·v)`.
    /// `R`, `T`, and `h` are unchanged; `A` and `B` are recomputed.
    pub fn rescale_intrinsics(&self, s_x: S, s_y: S) -> Result<Self> {
        if !(s_x > S::zero() && s_x.is_finite() && s_y > S::zero() && s_y.is_finite()) {
            return Err(Error::validation(format!(
                "rescale factors must be positive and finite, got ({s_x}, {s_y})"
            )));
        }
        let mut k = self.k;
        for (row, s) in [(0usize, s_x), (1, s_y)] {
            for cell in &mut k[row] {
                *cell = *cell * s;
            }
        }
        Self::new(k, self.r, self.t, self.h)
    }
}

fn validate_intrinsics<S: Scalar>(k: &Mat3<S>) -> Result<()> {
    if k[1][0] != S::zero() || k[2][0] != S::zero() || k[2][1] != S::zero() {
        return Err(Error::validation(
            "K must be upper-triangular (zero entries below the diagonal)".to_string(),
        ));
    }
    if !(k[0][0] > S::zero() && k[1][1] > S::zero() && k[2][2] > S::zero()) {
        return Err(Error::validation(
            "K must have a positive diagonal (f_x, f_y > 0)".to_string(),
        ));
    }
    // Normalized last row keeps the ray parameter equal to metric depth.
    if (k[2][2] - S::one()).abs() > S::of(1e-12).max(S::epsilon()) {
        return Err(Error::validation(format!(
            "K[2][2] must be 1 for metric depth, got {}",
            k[2][2]
        )));
    }
    Ok(())
}

fn validate_rotation<S: Scalar>(r: &Mat3<S>) -> Result<()> {
    let tol = S::validation_tol();
    let rtr = math::mat_mul(&math::transpose(r), r);
    let dev = math::max_abs_diff(&rtr, &math::identity());
    if dev > tol {
        return Err(Error::validation(format!(
            "R is not orthonormal: max |RᵀR - I| entry = {dev}"
        )));
    }
    let det = math::determinant(r);
    if (det - S::one()).abs() > tol {
        return Err(Error::validation(format!(
            "R is not a proper rotation: det(R) = {det}"
        )));
    }
    Ok(())
}

/// The ray shooting from the optical center through pixel `(u, v)`, bound
/// to its camera.
#[derive(Debug, Clone, Copy)]
pub struct PixelRay<'a, S> {
    cam: &'a CameraModel<S>,
    pub u: S,
    pub v: S,
}

impl<S: Scalar> PixelRay<'_, S> {
    /// World point at camera depth `z_c` along this ray.
    pub fn point_at(&self, z_c: S) -> Result<WorldPoint<S>> {
        self.cam.ray_point(self.u, self.v, z_c)
    }
}

/// Intrinsics for a zero-skew pinhole with focal lengths `(f_x, f_y)` and
/// principal point `(c_x, c_y)`.
pub fn intrinsics_matrix<S: Scalar>(f_x: S, f_y: S, c_x: S, c_y: S) -> Mat3<S> {
    let z = S::zero();
    [[f_x, z, c_x], [z, f_y, c_y], [z, z, S::one()]]
}

/// Identity camera: `K = I`, `R = I`, `T = 0`.
pub fn identity_camera<S: Scalar>(h: S) -> CameraModel<S> {
    CameraModel::new(math::identity(), math::identity(), [S::zero(); 3], h)
        .expect("identity camera is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{axis_angle_rotation, identity, mat_vec};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn identity_camera_has_identity_derivations() {
        let cam = identity_camera::<f64>(1.65);
        assert_eq!(cam.ray_matrix(), &identity::<f64>());
        assert_eq!(cam.center(), &[0.0; 3]);
        assert_eq!(cam.ground_height(), 1.65);
    }

    #[test]
    fn zero_extrinsics_make_ray_matrix_the_intrinsics_inverse() {
        let k = intrinsics_matrix(100.0, 100.0, 50.0, 50.0);
        let cam = CameraModel::new(k, identity(), [0.0; 3], 1.65).unwrap();
        let a = cam.ray_matrix();
        // K^-1 for diag(f, f, 1) with principal point folded in
        assert_close(a[0][0], 0.01, 1e-15);
        assert_close(a[0][2], -0.5, 1e-15);
        assert_close(a[1][1], 0.01, 1e-15);
        assert_close(a[1][2], -0.5, 1e-15);
        assert_close(a[2][2], 1.0, 1e-15);
        assert_eq!(cam.center(), &[0.0; 3]);
    }

    #[test]
    fn camera_center_solves_rb_plus_t_against_nalgebra() {
        // independent oracle: solve R x = -T with an LU factorization
        let r = axis_angle_rotation([0.2, 1.0, -0.5], 0.41f64);
        let t = [1.0, 2.0, 3.0];
        let cam =
            CameraModel::new(intrinsics_matrix(720.0, 730.0, 610.0, 180.0), r, t, 1.65).unwrap();

        let nr = nalgebra::Matrix3::from_fn(|i, j| r[i][j]);
        let nt = nalgebra::Vector3::new(-t[0], -t[1], -t[2]);
        let solved = nr.lu().solve(&nt).expect("rotation is invertible");
        let b = cam.center();
        for i in 0..3 {
            assert_close(b[i], solved[i], 1e-12);
        }
        // R·B + T = 0
        let rb = mat_vec(&r, b);
        for i in 0..3 {
            assert_close(rb[i] + t[i], 0.0, 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_intrinsics_and_rotations() {
        let mut k = intrinsics_matrix(100.0, 100.0, 50.0, 50.0);
        k[1][0] = 0.3;
        let err = CameraModel::new(k, identity(), [0.0; 3], 1.0).unwrap_err();
        assert!(err.to_string().contains("upper-triangular"), "{err}");

        let err = CameraModel::new(
            intrinsics_matrix(-5.0, 100.0, 0.0, 0.0),
            identity(),
            [0.0; 3],
            1.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("positive diagonal"), "{err}");

        let mut r = identity();
        r[0][0] = 1.1;
        let err =
            CameraModel::new(intrinsics_matrix(1.0, 1.0, 0.0, 0.0), r, [0.0; 3], 1.0).unwrap_err();
        assert!(err.to_string().contains("orthonormal"), "{err}");

        // reflection: orthonormal but det = -1
        let mut refl = identity();
        refl[0][0] = -1.0;
        let err = CameraModel::new(intrinsics_matrix(1.0, 1.0, 0.0, 0.0), refl, [0.0; 3], 1.0)
            .unwrap_err();
        assert!(err.to_string().contains("det"), "{err}");

        let mut k = intrinsics_matrix(1.0, 1.0, 0.0, 0.0);
        k[2][2] = 2.0;
        let err = CameraModel::new(k, identity(), [0.0; 3], 1.0).unwrap_err();
        assert!(err.to_string().contains("K[2][2]"), "{err}");
    }

    #[test]
    fn identity_ray_point_matches_hand_expansion() {
        let cam = identity_camera::<f64>(1.65);
        let p = cam.ray_point(0.0, 0.0, 5.0).unwrap();
        assert_eq!((p.x, p.y, p.z), (0.0, 0.0, 5.0));
        // (a·[2,3,1])·4 with A = I, B = 0
        let p = cam.ray_point(2.0, 3.0, 4.0).unwrap();
        assert_eq!((p.x, p.y, p.z), (8.0, 12.0, 4.0));
    }

    #[test]
    fn pixel_ray_binds_its_camera() {
        let cam = identity_camera::<f64>(1.65);
        let ray = cam.ray(2.0, 3.0);
        let p = ray.point_at(4.0).unwrap();
        assert_eq!((p.x, p.y, p.z), (8.0, 12.0, 4.0));
        assert!(ray.point_at(0.0).is_err());
    }

    #[test]
    fn identity_projection_examples() {
        let cam = identity_camera::<f64>(1.65);
        let (u, v, z) = cam.project(&WorldPoint::new(0.0, 0.0, 5.0)).unwrap();
        assert_eq!((u, v, z), (0.0, 0.0, 5.0));
        let (u, v, z) = cam.project(&WorldPoint::new(8.0, 12.0, 4.0)).unwrap();
        assert_eq!((u, v, z), (2.0, 3.0, 4.0));
    }

    #[test]
    fn behind_camera_is_rejected() {
        let cam = identity_camera::<f64>(1.65);
        assert!(cam.project(&WorldPoint::new(0.0, 0.0, -1.0)).is_err());
        assert!(cam.project(&WorldPoint::new(0.0, 0.0, 0.0)).is_err());
        assert!(cam.ray_point(0.0, 0.0, 0.0).is_err());
        assert!(cam.ray_point(0.0, 0.0, -2.0).is_err());
    }

    #[test]
    fn project_inverts_ray_point_on_a_rotated_camera() {
        let r = axis_angle_rotation([0.1, 0.9, 0.2], -0.12f64);
        let cam = CameraModel::new(
            intrinsics_matrix(640.0, 650.0, 320.0, 240.0),
            r,
            [0.4, -0.2, 0.9],
            1.65,
        )
        .unwrap();
        for &(u, v, z) in &[(12.5, 480.0, 3.0), (320.0, 240.0, 55.0), (0.0, 0.0, 1.0)] {
            let p = cam.ray_point(u, v, z).unwrap();
            let (u2, v2, z2) = cam.project(&p).unwrap();
            assert_close(u2, u, 1e-9);
            assert_close(v2, v, 1e-9);
            assert_close(z2, z, 1e-9);
        }
    }

    #[test]
    fn unprojected_planar_ground_lies_on_the_ground_plane() {
        // a rotated, translated rig: every valid planar-depth pixel must
        // unproject onto y_w = h
        let cam = CameraModel::new(
            intrinsics_matrix(120.0, 125.0, 32.0, 20.0),
            axis_angle_rotation([0.2, 0.05, 1.0], 0.06f64),
            [0.3, -0.1, 0.2],
            1.65,
        )
        .unwrap();
        let depth = crate::groundgeom::planar_ground_depth(&cam, 64, 48);
        let cloud = cam.unproject_depth_map(&depth);
        assert_eq!(cloud.len(), depth.valid_count());
        assert!(cloud.len() > 100);
        for p in cloud.points() {
            assert!((p[1] - 1.65).abs() < 1e-6, "point off the plane: {p:?}");
        }
    }

    #[test]
    fn unproject_depth_map_skips_sentinels() {
        let cam = identity_camera::<f64>(1.65);
        let all_invalid = DepthMap::new(3, 2, vec![0.0; 6]).unwrap();
        assert!(cam.unproject_depth_map(&all_invalid).is_empty());

        let mut data = vec![0.0; 6];
        data[0] = 5.0;
        let one = DepthMap::new(3, 2, data).unwrap();
        let cloud = cam.unproject_depth_map(&one);
        assert_eq!(cloud.points(), &[[0.0, 0.0, 5.0]]);
    }

    #[test]
    fn rescale_identity_is_identity() {
        let cam = CameraModel::new(
            intrinsics_matrix(700.0, 710.0, 600.0, 170.0),
            axis_angle_rotation([0.0, 0.0, 1.0], 0.02f64),
            [0.1, 0.2, 0.3],
            1.65,
        )
        .unwrap();
        let same = cam.rescale_intrinsics(1.0, 1.0).unwrap();
        assert_eq!(cam, same);
    }

    #[test]
    fn rescale_moves_projections_linearly() {
        let cam = CameraModel::new(
            intrinsics_matrix(1.0, 1.0, 0.0, 0.0),
            identity(),
            [0.0; 3],
            1.0,
        )
        .unwrap();
        let p = WorldPoint::new(1.0, 0.0, 1.0);
        let (u, _, _) = cam.project(&p).unwrap();
        assert_eq!(u, 1.0);
        let scaled = cam.rescale_intrinsics(2.0, 1.0).unwrap();
        let (u2, _, _) = scaled.project(&p).unwrap();
        assert_eq!(u2, 2.0);
    }

    #[test]
    fn rescale_rejects_non_positive_factors() {
        let cam = identity_camera::<f64>(1.0);
        assert!(cam.rescale_intrinsics(0.0, 1.0).is_err());
        assert!(cam.rescale_intrinsics(1.0, -2.0).is_err());
    }

    #[test]
    fn f32_camera_builds_within_its_tolerance() {
        let r = axis_angle_rotation([0.3f32, -0.1, 0.8], 0.15f32);
        let cam = CameraModel::new(
            intrinsics_matrix(300.0f32, 310.0, 160.0, 120.0),
            r,
            [0.5, -1.0, 0.25],
            1.65,
        );
        assert!(cam.is_ok());
    }
}
