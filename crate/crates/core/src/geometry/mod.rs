//! Pinhole cameras, DLT triangulation, eight-point epipolar estimation,
//! essential-matrix decomposition, quaternions and ray distances.
//!
//! Everything here is a pure function of its inputs.

mod camera;
mod epipolar;
mod quaternion;
mod rays;
mod triangulation;

use nalgebra::{Vector2, Vector3};

pub use camera::{intrinsics, project, Camera};
pub use epipolar::{
    decompose_to_pose, eight_point, eight_point_unnormalized, fundamental_from_cameras,
    symmetric_epipolar_distance, Correspondence, RelativePose,
};
pub use quaternion::{quat_weighted_average, Quaternion};
pub use rays::ray_distance;
pub use triangulation::{triangulate, triangulate_projections};

/// Pixel coordinates.
pub type Point2 = Vector2<f64>;
/// World coordinates in millimeters.
pub type Point3 = Vector3<f64>;

/// Minimum camera-frame depth (mm) for a point to count as in front.
pub const DEPTH_EPS: f64 = 1e-6;
