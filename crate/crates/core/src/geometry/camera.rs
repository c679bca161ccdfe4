use nalgebra::{Matrix3, Matrix3x4, Vector3};
use serde::{Deserialize, Serialize};

use super::{Point2, Point3, DEPTH_EPS};
use crate::error::{Error, Result};

/// Calibrated pinhole camera. `rotation`/`translation` map world points into
/// the camera frame: `X_c = R X_w + t`. Units are pixels and millimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub id: usize,
    pub intrinsics: Matrix3<f64>,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Camera {
    pub fn new(
        id: usize,
        intrinsics: Matrix3<f64>,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
    ) -> Self {
        Self {
            id,
            intrinsics,
            rotation,
            translation,
        }
    }

    /// Camera at `center` looking at `target`, with world +z as the up hint.
    pub fn look_at(id: usize, intrinsics: Matrix3<f64>, center: Point3, target: Point3) -> Self {
        let forward = (target - center).normalize();
        let mut up = Vector3::z();
        if forward.cross(&up).norm() < 1e-9 {
            up = Vector3::y();
        }
        let right = forward.cross(&up).normalize();
        let down = forward.cross(&right);
        let rotation = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let translation = -(rotation * center);
        Self::new(id, intrinsics, rotation, translation)
    }

    /// `P = K [R | t]`.
    pub fn projection(&self) -> Matrix3x4<f64> {
        let mut rt = Matrix3x4::zeros();
        rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        rt.set_column(3, &self.translation);
        self.intrinsics * rt
    }

    /// Optical center in world coordinates.
    pub fn center(&self) -> Point3 {
        -(self.rotation.transpose() * self.translation)
    }

    pub fn to_camera_frame(&self, point: &Point3) -> Point3 {
        self.rotation * point + self.translation
    }

    /// Depth of a world point along the optical axis.
    pub fn depth(&self, point: &Point3) -> f64 {
        self.to_camera_frame(point).z
    }

    /// Image size implied by a centered principal point: `(2 c_x, 2 c_y)`.
    pub fn image_size(&self) -> (f64, f64) {
        (2.0 * self.intrinsics[(0, 2)], 2.0 * self.intrinsics[(1, 2)])
    }

    pub fn in_image(&self, pixel: &Point2) -> bool {
        let (w, h) = self.image_size();
        pixel.x >= 0.0 && pixel.y >= 0.0 && pixel.x <= w && pixel.y <= h
    }

    /// World-frame direction of the ray through `pixel` (not normalized).
    pub fn ray_direction(&self, pixel: &Point2) -> Vector3<f64> {
        let k_inv = self
            .intrinsics
            .try_inverse()
            .expect("intrinsics are upper-triangular with a positive diagonal");
        self.rotation.transpose() * (k_inv * Vector3::new(pixel.x, pixel.y, 1.0))
    }

    /// Checks the structural invariants of the camera record.
    pub fn validate(&self) -> Result<()> {
        let k = &self.intrinsics;
        let upper = k[(1, 0)] == 0.0 && k[(2, 0)] == 0.0 && k[(2, 1)] == 0.0;
        if !upper || k[(0, 0)] <= 0.0 || k[(1, 1)] <= 0.0 || k[(2, 2)] <= 0.0 {
            return Err(Error::ShapeMismatch(format!(
                "camera {}: intrinsics must be upper-triangular with a positive diagonal",
                self.id
            )));
        }
        let ortho = (self.rotation * self.rotation.transpose() - Matrix3::identity()).amax();
        let det = self.rotation.determinant();
        if ortho > 1e-9 || (det - 1.0).abs() > 1e-9 {
            return Err(Error::ShapeMismatch(format!(
                "camera {}: rotation is not a proper orthonormal matrix",
                self.id
            )));
        }
        Ok(())
    }
}

/// Pinhole intrinsics with square pixels and zero skew.
pub fn intrinsics(focal: f64, cx: f64, cy: f64) -> Matrix3<f64> {
    Matrix3::new(focal, 0.0, cx, 0.0, focal, cy, 0.0, 0.0, 1.0)
}

/// Projects a world point through the camera.
pub fn project(camera: &Camera, point: &Point3) -> Result<Point2> {
    let depth = camera.depth(point);
    if depth <= DEPTH_EPS {
        return Err(Error::PointBehindCamera { depth });
    }
    let h = camera.projection() * point.push(1.0);
    Ok(Point2::new(h.x / h.z, h.y / h.z))
}
