//! Small fixed-size linear algebra for the camera model.
//!
//! Everything here is 3×3 or 3-vector arithmetic on plain arrays; the crate
//! deliberately carries no linear-algebra dependency for a handful of
//! cofactor expansions.

use crate::scalar::Scalar;

/// 3×3 matrix, row-major.
pub type Mat3<S> = [[S; 3]; 3];

/// 3-vector.
pub type Vec3<S> = [S; 3];

pub fn identity<S: Scalar>() -> Mat3<S> {
    let o = S::one();
    let z = S::zero();
    [[o, z, z], [z, o, z], [z, z, o]]
}

pub fn mat_mul<S: Scalar>(a: &Mat3<S>, b: &Mat3<S>) -> Mat3<S> {
    let mut out = [[S::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn mat_vec<S: Scalar>(m: &Mat3<S>, v: &Vec3<S>) -> Vec3<S> {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn transpose<S: Scalar>(m: &Mat3<S>) -> Mat3<S> {
    [
        [m[0][0], m[1][0], m[2][0]],
        [m[0][1], m[1][1], m[2][1]],
        [m[0][2], m[1][2], m[2][2]],
    ]
}

pub fn determinant<S: Scalar>(m: &Mat3<S>) -> S {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by the adjugate; `None` when the determinant is zero, subnormal,
/// or non-finite.
pub fn inverse<S: Scalar>(m: &Mat3<S>) -> Option<Mat3<S>> {
    let det = determinant(m);
    if !det.is_normal() {
        return None;
    }
    let inv_det = S::one() / det;
    let mut out = [[S::zero(); 3]; 3];
    // adjugate: transposed cofactors
    out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    out[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    out[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    out[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    out[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    out[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    out[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    Some(out)
}

pub fn norm<S: Scalar>(v: &Vec3<S>) -> S {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn normalize<S: Scalar>(v: &Vec3<S>) -> Vec3<S> {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

pub fn neg<S: Scalar>(v: &Vec3<S>) -> Vec3<S> {
    [-v[0], -v[1], -v[2]]
}

pub fn max_abs_diff<S: Scalar>(a: &Mat3<S>, b: &Mat3<S>) -> S {
    let mut worst = S::zero();
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}

/// Rotation matrix for a rotation of `angle` radians about `axis`
/// (Rodrigues formula); the axis is normalized internally.
pub fn axis_angle_rotation<S: Scalar>(axis: Vec3<S>, angle: S) -> Mat3<S> {
    let [x, y, z] = normalize(&axis);
    let (sin, cos) = angle.sin_cos();
    let omc = S::one() - cos;
    [
        [
            cos + x * x * omc,
            x * y * omc - z * sin,
            x * z * omc + y * sin,
        ],
        [
            y * x * omc + z * sin,
            cos + y * y * omc,
            y * z * omc - x * sin,
        ],
        [
            z * x * omc - y * sin,
            z * y * omc + x * sin,
            cos + z * z * omc,
        ],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_approx_eq(a: &Mat3<f64>, b: &Mat3<f64>, tol: f64) {
        assert!(max_abs_diff(a, b) < tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m: Mat3<f64> = [[2.0, 1.0, 0.5], [0.0, 3.0, -1.0], [4.0, 0.0, 1.0]];
        let inv = inverse(&m).unwrap();
        mat_approx_eq(&mat_mul(&m, &inv), &identity(), 1e-12);
        mat_approx_eq(&mat_mul(&inv, &m), &identity(), 1e-12);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m: Mat3<f64> = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]];
        assert!(inverse(&m).is_none());
    }

    #[test]
    fn rotation_is_orthonormal() {
        let r = axis_angle_rotation([0.3, -0.2, 0.9], 0.17f64);
        mat_approx_eq(&mat_mul(&transpose(&r), &r), &identity(), 1e-14);
        assert!((determinant(&r) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_zero_angle_is_identity() {
        let r = axis_angle_rotation([1.0, 0.0, 0.0], 0.0f64);
        mat_approx_eq(&r, &identity(), 0.0_f64.max(1e-15));
    }

    #[test]
    fn inverse_matches_nalgebra() {
        let m: Mat3<f64> = [[1.3, -0.2, 0.7], [0.1, 2.9, -1.4], [-0.6, 0.4, 1.1]];
        let inv = inverse(&m).unwrap();
        let nm = nalgebra::Matrix3::new(
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        );
        let ninv = nm.try_inverse().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((inv[i][j] - ninv[(i, j)]).abs() < 1e-12);
            }
        }
    }
}
