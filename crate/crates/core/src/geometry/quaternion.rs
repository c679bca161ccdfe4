use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit quaternion `w + xi + yj + zk` representing a rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Builds a unit quaternion from raw components, normalizing them.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector4::new(w, x, y, z))
    }

    fn from_vector(v: Vector4<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n >= 1e-12) {
            return Err(Error::ZeroNorm);
        }
        let v = v / n;
        Ok(Self {
            w: v[0],
            x: v[1],
            y: v[2],
            z: v[3],
        })
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.w, self.x, self.y, self.z)
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let a = axis.normalize() * (0.5 * angle).sin();
        let c = (0.5 * angle).cos();
        Self {
            w: c,
            x: a.x,
            y: a.y,
            z: a.z,
        }
    }

    /// Converts an orthonormal rotation matrix.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let uq = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*m));
        let q = uq.quaternion();
        Self {
            w: q.w,
            x: q.i,
            y: q.j,
            z: q.k,
        }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let uq = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(self.w, self.x, self.y, self.z));
        *uq.to_rotation_matrix().matrix()
    }

    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.as_vector().dot(&other.as_vector())
    }

    pub fn negated(&self) -> Self {
        Self {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Geodesic rotation angle between two rotations, in radians.
    pub fn angle_to(&self, other: &Quaternion) -> f64 {
        let d = self.dot(other).abs().min(1.0);
        2.0 * d.acos()
    }

    /// Euclidean distance after aligning `self` to the hemisphere of `reference`.
    pub fn aligned_distance(&self, reference: &Quaternion) -> f64 {
        let q = if self.dot(reference) < 0.0 { self.negated() } else { *self };
        (q.as_vector() - reference.as_vector()).norm()
    }
}

/// Weighted quaternion mean: sign-align every element to the first,
/// sum the weighted components and renormalize.
pub fn quat_weighted_average(quats: &[Quaternion], weights: &[f64]) -> Result<Quaternion> {
    if quats.is_empty() {
        return Err(Error::EmptyPool);
    }
    if quats.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: quats.len(),
            right: weights.len(),
        });
    }
    let anchor = quats[0];
    let mut acc = Vector4::zeros();
    for (q, &w) in quats.iter().zip(weights) {
        let v = q.as_vector();
        if q.dot(&anchor) < 0.0 {
            acc -= v * w;
        } else {
            acc += v * w;
        }
    }
    Quaternion::from_vector(acc)
}
