use nalgebra::Matrix3x4;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{decompose_to_pose, eight_point, triangulate_projections, Camera, Point2, Point3, RelativePose};
use crate::hypotheses::{DetectionSet, PairObservations};
use crate::skeleton::Pose;

fn reprojection_error(p: &Matrix3x4<f64>, x: &Point3, obs: &Point2) -> f64 {
    let h = p * x.push(1.0);
    if h.z <= 0.0 {
        return f64::INFINITY;
    }
    (Point2::new(h.x / h.z, h.y / h.z) - obs).norm()
}

/// Per-joint RANSAC triangulation.
///
/// Each iteration triangulates a random pair of valid views and counts the
/// views whose reprojection error is within `threshold_px`. The largest
/// consensus set (ties: lower total inlier error) is refit with all its
/// views. When no pair reaches two inliers the sampled pair with the lowest
/// total reprojection error over all valid views is returned.
pub fn ransac_triangulation_baseline(
    det: &DetectionSet,
    cameras: &[Camera],
    threshold_px: f64,
    iterations: usize,
    seed: u64,
) -> Result<Pose> {
    det.validate(cameras.len())?;
    let projections: Vec<Matrix3x4<f64>> = cameras.iter().map(Camera::projection).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut joints = Vec::with_capacity(det.joint_count());
    for j in 0..det.joint_count() {
        let views = det.valid_views(j);
        let obs = &det.keypoints[j];
        let mut best_consensus: Option<(usize, f64, Vec<usize>)> = None;
        let mut best_pair: Option<(f64, Point3)> = None;
        for _ in 0..iterations.max(1) {
            let pick = sample(&mut rng, views.len(), 2);
            let (a, b) = (views[pick.index(0)], views[pick.index(1)]);
            let x = triangulate_projections(&[projections[a], projections[b]], &[obs[a], obs[b]])?;
            let errs: Vec<(usize, f64)> = views.iter().map(|&v| (v, reprojection_error(&projections[v], &x, &obs[v]))).collect();
            let total: f64 = errs.iter().map(|e| e.1).sum();
            if best_pair.as_ref().map_or(true, |(t, _)| total < *t) {
                best_pair = Some((total, x));
            }
            let inliers: Vec<usize> = errs.iter().filter(|e| e.1 <= threshold_px).map(|e| e.0).collect();
            if inliers.len() < 2 {
                continue;
            }
            let inlier_err: f64 = errs.iter().filter(|e| e.1 <= threshold_px).map(|e| e.1).sum();
            let better = match &best_consensus {
                None => true,
                Some((n, e, _)) => inliers.len() > *n || (inliers.len() == *n && inlier_err < *e),
            };
            if better {
                best_consensus = Some((inliers.len(), inlier_err, inliers));
            }
        }
        let x = match best_consensus {
            Some((_, _, inliers)) => {
                let ps: Vec<_> = inliers.iter().map(|&v| projections[v]).collect();
                let os: Vec<_> = inliers.iter().map(|&v| obs[v]).collect();
                triangulate_projections(&ps, &os)?
            }
            None => best_pair.ok_or(Error::NoValidPair { joint: j })?.1,
        };
        joints.push(x);
    }
    Ok(Pose::new(joints))
}

/// One normalized eight-point solve over every correspondence, decomposed
/// with cheirality over the same correspondences and scaled to the true
/// baseline.
pub fn vanilla_8pt_baseline(obs: &PairObservations) -> Result<RelativePose> {
    let f = eight_point(&obs.corrs)?;
    decompose_to_pose(&f, &obs.reference.intrinsics, &obs.target.intrinsics, &obs.corrs, obs.baseline())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::mpjpe;
    use crate::skeleton::Skeleton;
    use crate::synth::{generate_sequence, render_detections, NoiseSpec, RigSpec};

    #[test]
    fn noiseless_baselines_are_exact() {
        let skel = Skeleton::human17();
        let poses = generate_sequence(12, &skel, 2).unwrap();
        let rig = RigSpec::ring(4).build().unwrap();
        let dets = render_detections(&poses, &rig, &NoiseSpec::noiseless()).unwrap();
        let est = ransac_triangulation_baseline(&dets[0], &rig, 10.0, 50, 1).unwrap();
        assert!(mpjpe(&est, &poses[0]).unwrap() < 1e-6);
        let obs = PairObservations::new(&dets, &rig, 0, 1).unwrap();
        let rel = vanilla_8pt_baseline(&obs).unwrap();
        let truth = obs.truth();
        assert!(rel.rotation.aligned_distance(&truth.rotation) < 1e-6);
        assert!((rel.translation - truth.translation).norm() < 1e-6);
    }

    #[test]
    fn zero_threshold_falls_back_to_best_pair() {
        let skel = Skeleton::human17();
        let poses = generate_sequence(1, &skel, 2).unwrap();
        let rig = RigSpec::ring(4).build().unwrap();
        let dets = render_detections(&poses, &rig, &NoiseSpec::gaussian(2.0, 5)).unwrap();
        let est = ransac_triangulation_baseline(&dets[0], &rig, 0.0, 50, 1).unwrap();
        assert!(mpjpe(&est, &poses[0]).unwrap() < 100.0);
    }
}
