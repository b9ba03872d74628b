//! Closed-form ground depth from camera geometry.
//!
//! Given pinhole intrinsics and extrinsics, every ray through a pixel
//! either meets the ground surface at a unique camera-frame depth or
//! misses it. This crate computes those depths in closed form for planar
//! and sloped ground ([`groundgeom`]), derives ground-slope supervision
//! from sparse depth samples, blends ground depth with residual depth
//! through a per-pixel attention map ([`blend`]), and scores depth
//! predictions with the standard 2D error metrics plus point-cloud
//! F-score/IoU ([`metrics`]).
//!
//! The [`oracle`] module renders the same scenes by geometric ray
//! intersection — analytically for planes and ramps, marched and
//! bisection-refined for undulating profiles — and serves as the
//! independent verifier for every closed-form expression.
//!
//! Numeric code is generic over the scalar type (`f32` or `f64`) through
//! [`Scalar`]; concrete aliases for the common types sit at the crate
//! root. File formats (calibration text, KITTI-style 16-bit depth PNG,
//! PFM float maps, sparse-sample text, JSON scenes) live in [`dataio`].

pub mod blend;
pub mod camera;
pub mod dataio;
pub mod error;
pub mod groundgeom;
pub mod map;
pub mod math;
pub mod metrics;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type CameraModelF32 = camera::CameraModel<f32>;
pub type CameraModelF64 = camera::CameraModel<f64>;
pub type DepthMapF32 = map::DepthMap<f32>;
pub type DepthMapF64 = map::DepthMap<f64>;
pub type SlopeMapF32 = map::SlopeMap<f32>;
pub type SlopeMapF64 = map::SlopeMap<f64>;
pub type AttentionMapF32 = map::AttentionMap<f32>;
pub type AttentionMapF64 = map::AttentionMap<f64>;
pub type PointCloudF32 = metrics::PointCloud<f32>;
pub type PointCloudF64 = metrics::PointCloud<f64>;
