//! Evaluation metrics: MPJPE, the left/right part-ratio pose prior, and the
//! relative camera pose errors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{project, triangulate_projections, Camera, Correspondence, Point2, Point3, RelativePose, DEPTH_EPS};
use crate::skeleton::Skeleton;

/// Mean per-joint position error in millimeters.
pub fn mpjpe(estimate: &[Point3], truth: &[Point3]) -> Result<f64> {
    if estimate.len() != truth.len() || estimate.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "pose with {} joints vs {} joints",
            estimate.len(),
            truth.len()
        )));
    }
    let sum: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b).norm()).sum();
    Ok(sum / estimate.len() as f64)
}

/// Sample variance over time of the left/right length ratio for each
/// symmetric body-part pair.
pub fn pose_prior_variance<P: AsRef<[Point3]>>(sequence: &[P], skel: &Skeleton) -> Result<Vec<f64>> {
    if sequence.len() < 2 {
        return Err(Error::ShapeMismatch(format!(
            "pose prior needs at least 2 frames, got {}",
            sequence.len()
        )));
    }
    let mut ratios = vec![Vec::with_capacity(sequence.len()); skel.symmetric_pairs.len()];
    for pose in sequence {
        let lengths = skel.part_lengths(pose.as_ref());
        for (pair, &(left, right)) in skel.symmetric_pairs.iter().enumerate() {
            if lengths[right] <= 1e-9 {
                return Err(Error::ZeroLimb { pair });
            }
            ratios[pair].push(lengths[left] / lengths[right]);
        }
    }
    Ok(ratios.iter().map(|r| sample_variance(r)).collect())
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Relative camera pose errors against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraErrors {
    /// Quaternion difference norm after hemisphere alignment.
    pub rotation: f64,
    /// Translation difference (mm).
    pub translation: f64,
    /// Mean reprojection distance of the probes in the target view (px).
    pub reprojection_2d: f64,
    /// Mean 3D error of probes triangulated with the estimated camera (mm).
    pub reconstruction_3d: f64,
}

/// Errors of an estimated relative pose.
///
/// Probes are observed by the reference camera and the true target camera;
/// `reconstruction_3d` triangulates those observations with the reference
/// and the estimated target projection matrices.
pub fn camera_errors(
    est: &RelativePose,
    truth: &RelativePose,
    ref_cam: &Camera,
    truth_cam: &Camera,
    probes: &[Point3],
) -> Result<CameraErrors> {
    let est_cam = est.target_camera(ref_cam, truth_cam.intrinsics, truth_cam.id);
    let obs = probe_observations(ref_cam, truth_cam, probes)?;
    let p_est = est_cam.projection();
    let mut e2d = 0.0;
    for (x, (_, x_true)) in probes.iter().zip(&obs) {
        // a wrong estimate may put probes behind its camera; use the plain
        // perspective division there
        let h = p_est * x.push(1.0);
        e2d += (Point2::new(h.x / h.z, h.y / h.z) - x_true).norm();
    }
    Ok(CameraErrors {
        rotation: est.rotation.aligned_distance(&truth.rotation),
        translation: (est.translation - truth.translation).norm(),
        reprojection_2d: e2d / probes.len().max(1) as f64,
        reconstruction_3d: reconstruction_error(ref_cam, &est_cam, &obs, probes)?,
    })
}

/// Exact projections of the probes into the reference and true target views.
pub fn probe_observations(ref_cam: &Camera, truth_cam: &Camera, probes: &[Point3]) -> Result<Vec<Correspondence>> {
    probes
        .iter()
        .map(|x| Ok((project(ref_cam, x)?, project(truth_cam, x)?)))
        .collect()
}

/// Mean distance (mm) between each probe and its triangulation from
/// `observations` with the reference and an estimated target camera.
pub fn reconstruction_error(
    ref_cam: &Camera,
    est_cam: &Camera,
    observations: &[Correspondence],
    probes: &[Point3],
) -> Result<f64> {
    if observations.len() != probes.len() {
        return Err(Error::LengthMismatch {
            left: observations.len(),
            right: probes.len(),
        });
    }
    let ps = [ref_cam.projection(), est_cam.projection()];
    let mut total = 0.0;
    for ((a, b), x) in observations.iter().zip(probes) {
        total += (triangulate_projections(&ps, &[*a, *b])? - x).norm();
    }
    Ok(total / probes.len().max(1) as f64)
}

/// Uniform samples from a cube (side `2 * half_extent`) around `center`
/// that are in front of and inside the image of every camera.
pub fn probe_points<R: Rng>(
    cameras: &[&Camera],
    center: &Point3,
    half_extent: f64,
    count: usize,
    rng: &mut R,
) -> Vec<Point3> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 1000 {
        attempts += 1;
        let x = center
            + Point3::new(
                rng.random_range(-half_extent..half_extent),
                rng.random_range(-half_extent..half_extent),
                rng.random_range(-half_extent..half_extent),
            );
        let visible = cameras.iter().all(|c| {
            c.depth(&x) > DEPTH_EPS && project(c, &x).map(|p| c.in_image(&p)).unwrap_or(false)
        });
        if visible {
            out.push(x);
        }
    }
    out
}
