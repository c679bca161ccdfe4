use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{project, Camera, Point2, DEPTH_EPS};
use crate::hypotheses::DetectionSet;
use crate::skeleton::Pose;

/// 2D detection noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Isotropic Gaussian noise per coordinate (px).
    pub pixel_sigma: f64,
    /// Probability that a detection is replaced by an outlier.
    pub outlier_rate: f64,
    /// Distance of an outlier from the exact projection (px).
    pub outlier_magnitude: f64,
    /// Probability that a detection is missing.
    pub occlusion_rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            pixel_sigma: 0.0,
            outlier_rate: 0.0,
            outlier_magnitude: 0.0,
            occlusion_rate: 0.0,
            seed: 0,
        }
    }

    pub fn gaussian(pixel_sigma: f64, seed: u64) -> Self {
        Self {
            pixel_sigma,
            seed,
            ..Self::noiseless()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !(self.pixel_sigma >= 0.0) || !(self.outlier_magnitude >= 0.0) {
            return Err(Error::Config("noise sigmas must be nonnegative".into()));
        }
        if !rate_ok(self.outlier_rate) || !rate_ok(self.occlusion_rate) {
            return Err(Error::Config("noise rates must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

const OCCLUSION_RETRIES: usize = 100;

/// Projects every joint into every camera and applies the noise model.
///
/// Detections that fall behind a camera or outside its image are invalid.
/// Occlusions that would leave a joint with fewer than two valid views are
/// redrawn.
pub fn render_detections(poses: &[Pose], rig: &[Camera], noise: &NoiseSpec) -> Result<Vec<DetectionSet>> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let k = rig.len();
    let mut out = Vec::with_capacity(poses.len());
    for (frame, pose) in poses.iter().enumerate() {
        let mut keypoints = Vec::with_capacity(pose.len());
        let mut valid = Vec::with_capacity(pose.len());
        for (joint, x) in pose.iter().enumerate() {
            let mut kp = vec![Point2::zeros(); k];
            let mut visible = vec![false; k];
            for (v, cam) in rig.iter().enumerate() {
                // draw everything unconditionally to keep the stream aligned
                let nx: f64 = rng.sample(StandardNormal);
                let ny: f64 = rng.sample(StandardNormal);
                let outlier = rng.random::<f64>() < noise.outlier_rate;
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                if cam.depth(x) <= DEPTH_EPS {
                    continue;
                }
                let exact = project(cam, x)?;
                if !cam.in_image(&exact) {
                    continue;
                }
                visible[v] = true;
                kp[v] = if outlier {
                    exact + Point2::new(theta.cos(), theta.sin()) * noise.outlier_magnitude
                } else {
                    exact + Point2::new(nx, ny) * noise.pixel_sigma
                };
            }
            if visible.iter().filter(|&&b| b).count() < 2 {
                return Err(Error::UnrenderableFrame { frame, joint });
            }
            let mut mask = visible.clone();
            for _ in 0..OCCLUSION_RETRIES {
                for (m, &vis) in mask.iter_mut().zip(&visible) {
                    *m = vis && rng.random::<f64>() >= noise.occlusion_rate;
                }
                if mask.iter().filter(|&&b| b).count() >= 2 {
                    break;
                }
            }
            if mask.iter().filter(|&&b| b).count() < 2 {
                mask = visible;
            }
            keypoints.push(kp);
            valid.push(mask);
        }
        out.push(DetectionSet {
            frame_id: frame,
            keypoints,
            valid,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::Skeleton;
    use crate::synth::{generate_sequence, RigSpec};

    #[test]
    fn noiseless_matches_projection() {
        let skel = Skeleton::human17();
        let poses = generate_sequence(5, &skel, 1).unwrap();
        let rig = RigSpec::ring(4).build().unwrap();
        let dets = render_detections(&poses, &rig, &NoiseSpec::noiseless()).unwrap();
        for (d, p) in dets.iter().zip(&poses) {
            for (j, x) in p.iter().enumerate() {
                for (v, cam) in rig.iter().enumerate() {
                    assert!(d.valid[j][v]);
                    assert_eq!(d.keypoints[j][v], project(cam, x).unwrap());
                }
            }
        }
    }

    #[test]
    fn occlusion_keeps_two_views() {
        let skel = Skeleton::human17();
        let poses = generate_sequence(40, &skel, 2).unwrap();
        let rig = RigSpec::ring(4).build().unwrap();
        let noise = NoiseSpec {
            occlusion_rate: 0.3,
            ..NoiseSpec::gaussian(1.0, 3)
        };
        let dets = render_detections(&poses, &rig, &noise).unwrap();
        let mut missing = 0;
        for d in &dets {
            for v in &d.valid {
                let n = v.iter().filter(|&&b| b).count();
                assert!(n >= 2);
                missing += 4 - n;
            }
        }
        assert!(missing > 0);
    }

    #[test]
    fn rejects_bad_rates() {
        let noise = NoiseSpec {
            outlier_rate: 1.5,
            ..NoiseSpec::noiseless()
        };
        assert!(render_detections(&[], &[], &noise).is_err());
    }
}
