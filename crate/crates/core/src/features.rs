//! Network inputs for both hypothesis kinds.
//!
//! Pose hypotheses are canonicalized (pelvis at the origin, torso plane on
//! the xy-plane, shoulder axis along +x) and concatenated with their body
//! part lengths. Camera hypotheses are summarized by the sorted distances
//! between corresponding back-projected rays.

use nalgebra::{Rotation3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{ray_distance, Camera, Correspondence, Point3, RelativePose};
use crate::skeleton::{Pose, Skeleton};

/// Moves the pelvis (hip midpoint) to the origin and rotates the pose so the
/// plane through the shoulders and pelvis has normal +z and the left→right
/// shoulder direction points along +x.
pub fn normalize_pose(pose: &[Point3], skel: &Skeleton) -> Result<Pose> {
    let pelvis = (pose[skel.left_hip] + pose[skel.right_hip]) * 0.5;
    let ls = pose[skel.left_shoulder] - pelvis;
    let rs = pose[skel.right_shoulder] - pelvis;
    let normal = rs.cross(&ls);
    if normal.norm() < 1e-9 {
        return Err(Error::DegenerateTorso);
    }
    let normal = normal.normalize();
    let z = Vector3::z();
    let axis = normal.cross(&z);
    let to_plane = if axis.norm() < 1e-15 {
        if normal.z > 0.0 {
            Rotation3::identity()
        } else {
            Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI)
        }
    } else {
        let angle = normal.dot(&z).clamp(-1.0, 1.0).acos();
        Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle)
    };
    // fix the remaining in-plane heading
    let shoulders = to_plane * (rs - ls);
    let heading = Rotation3::from_axis_angle(&Vector3::z_axis(), -shoulders.y.atan2(shoulders.x));
    let r = heading * to_plane;
    Ok(Pose::new(pose.iter().map(|p| r * (p - pelvis)).collect()))
}

/// Normalized coordinates (x, y, z per joint) followed by the part lengths.
pub fn pose_feature(pose: &[Point3], skel: &Skeleton) -> Result<Vec<f64>> {
    let normalized = normalize_pose(pose, skel)?;
    let mut out = Vec::with_capacity(3 * pose.len() + skel.edges.len());
    for p in normalized.iter() {
        out.extend_from_slice(p.as_slice());
    }
    out.extend(skel.part_lengths(pose));
    Ok(out)
}

/// Width of [`pose_feature`] for a skeleton.
pub fn pose_feature_width(skel: &Skeleton) -> usize {
    3 * skel.joint_count() + skel.edges.len()
}

/// Sorted (ascending) distances between the reference-camera ray and the
/// hypothesized target-camera ray of every correspondence.
pub fn cam_feature(
    hypothesis: &RelativePose,
    ref_cam: &Camera,
    target_intrinsics: &nalgebra::Matrix3<f64>,
    corrs: &[Correspondence],
) -> Vec<f64> {
    let cam = hypothesis.target_camera(ref_cam, *target_intrinsics, usize::MAX);
    let mut d: Vec<f64> = corrs.iter().map(|(a, b)| ray_distance(ref_cam, a, &cam, b)).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Linearly interpolated quantiles of a sorted vector at `width` evenly
/// spaced levels, so features from any number of correspondences fit a
/// fixed network input.
pub fn resample_sorted(sorted: &[f64], width: usize) -> Vec<f64> {
    if sorted.len() == width || sorted.is_empty() {
        return sorted.to_vec();
    }
    if width == 1 {
        return vec![sorted[sorted.len() / 2]];
    }
    let last = (sorted.len() - 1) as f64;
    (0..width)
        .map(|i| {
            let pos = i as f64 * last / (width - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(sorted.len() - 1);
            let frac = pos - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        })
        .collect()
}
