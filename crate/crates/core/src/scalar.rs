//! Scalar abstraction: the geometry and metric code is generic over `f32`
//! and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar type the library is generic over.
///
/// Implemented for `f32` and `f64`. All tolerances quoted in the crate
/// documentation assume `f64`; the `f32` instantiation relaxes validation
/// tolerances through [`Scalar::validation_tol`].
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant to this scalar type.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant")
    }

    /// Converts a pixel index to this scalar type.
    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("pixel index fits in scalar")
    }

    /// Tolerance for validating rotation orthonormality and the derived
    /// camera-matrix identities: 1e-9 for `f64`, scaled up with machine
    /// epsilon for `f32`.
    fn validation_tol() -> Self {
        Self::of(1e-9).max(Self::epsilon() * Self::of(100.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Values with magnitude below this count as a vanishing denominator in the
/// ray–ground intersection formulas and produce the invalid-depth sentinel.
pub fn near_zero<S: Scalar>(x: S) -> bool {
    x.abs() < S::of(1e-12)
}

/// Degrees to radians.
pub fn deg_to_rad<S: Scalar>(deg: S) -> S {
    deg * S::PI() / S::of(180.0)
}

/// Radians to degrees.
pub fn rad_to_deg<S: Scalar>(rad: S) -> S {
    rad * S::of(180.0) / S::PI()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_radian_round_trip() {
        let deg = 5.0f64;
        assert!((rad_to_deg(deg_to_rad(deg)) - deg).abs() < 1e-12);
        assert!((deg_to_rad(30.0f64) - std::f64::consts::FRAC_PI_6).abs() < 1e-15);
    }

    #[test]
    fn near_zero_threshold() {
        assert!(near_zero(0.0f64));
        assert!(near_zero(9.9e-13f64));
        assert!(!near_zero(1.1e-12f64));
        assert!(!near_zero(-1.0f64));
    }

    #[test]
    fn f32_validation_tol_wider_than_f64() {
        assert!(f32::validation_tol() > 1e-6);
        assert_eq!(f64::validation_tol(), 1e-9);
    }
}
