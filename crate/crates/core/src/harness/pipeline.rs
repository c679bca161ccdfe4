//! Per-frame building blocks shared by training, evaluation and the
//! experiments: pool construction, features, errors and scoring.

use nalgebra::Matrix3x4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::features::{cam_feature, pose_feature, resample_sorted};
use crate::geometry::{triangulate_projections, Camera, Correspondence, Point3, RelativePose};
use crate::hypotheses::{
    generate_camera_pool, generate_pose_pool_with, CamPoseHypothesis, DetectionSet, HypothesisPool,
    PairObservations, PoseHypothesis,
};
use crate::metrics::{mpjpe, probe_observations, probe_points, reconstruction_error};
use crate::scorer::{gumbel_softmax, GumbelConfig, ScoringNetwork};
use crate::skeleton::{Pose, Skeleton};

/// Side half-length of the probe cube around the subject (mm).
pub const PROBE_HALF_EXTENT: f64 = 1000.0;

/// Independent seed for stream `stream`, item `index` of a run.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0xA076_1D64_78BD_642F))
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A pose pool with network inputs.
pub struct PoseSample {
    pub pool: Vec<PoseHypothesis>,
    pub features: Vec<Vec<f64>>,
}

impl PoseSample {
    pub fn new(det: &DetectionSet, projections: &[Matrix3x4<f64>], skel: &Skeleton, n_pool: usize, seed: u64) -> Result<Self> {
        let pool = generate_pose_pool_with(det, projections, n_pool, seed)?;
        let features = pool.iter().map(|h| pose_feature(&h.pose, skel)).collect::<Result<_>>()?;
        Ok(Self { pool, features })
    }

    pub fn errors(&self, truth: &[Point3]) -> Result<Vec<f64>> {
        self.pool.iter().map(|h| mpjpe(&h.pose, truth)).collect()
    }

    pub fn poses(&self) -> Vec<&[Point3]> {
        self.pool.iter().map(|h| &h.pose[..]).collect()
    }

    /// Inference-time pool of poses with noise-free probabilities.
    pub fn scored(&self, net: &ScoringNetwork, temperature: f64) -> Result<HypothesisPool<Pose>> {
        score(net, &self.features, temperature, self.pool.iter().map(|h| h.pose.clone()).collect())
    }
}

/// A camera pool over one frame window with its metric probes.
pub struct CameraSample {
    pub obs: PairObservations,
    pub pool: Vec<CamPoseHypothesis>,
    pub features: Vec<Vec<f64>>,
    pub probes: Vec<Point3>,
    pub probe_obs: Vec<Correspondence>,
}

impl CameraSample {
    pub fn new(obs: PairObservations, cfg: &TrainConfig, frames: usize, joints: usize, center: &Point3, seed: u64) -> Result<Self> {
        let n = obs.corrs.len();
        let t = cfg.subset_size_for(frames, joints).min(n.saturating_sub(1));
        let pool = generate_camera_pool(&obs, t, cfg.pool_size, derive_seed(seed, 0, 0))?;
        let k2 = obs.target.intrinsics;
        let features = pool
            .iter()
            .map(|h| resample_sorted(&cam_feature(&h.pose, &obs.reference, &k2, &obs.corrs), cfg.feature_width))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1, 0));
        let probes = probe_points(&[&obs.reference, &obs.target], center, PROBE_HALF_EXTENT, cfg.probe_count, &mut rng);
        if probes.is_empty() {
            return Err(Error::ShapeMismatch("no probe point is visible in both views".into()));
        }
        let probe_obs = probe_observations(&obs.reference, &obs.target, &probes)?;
        Ok(Self {
            obs,
            pool,
            features,
            probes,
            probe_obs,
        })
    }

    /// 3D reconstruction error of the probes under a relative pose.
    pub fn error(&self, pose: &RelativePose) -> Result<f64> {
        let cam = pose.target_camera(&self.obs.reference, self.obs.target.intrinsics, self.obs.target.id);
        reconstruction_error(&self.obs.reference, &cam, &self.probe_obs, &self.probes)
    }

    pub fn errors(&self) -> Result<Vec<f64>> {
        self.pool.iter().map(|h| self.error(&h.pose)).collect()
    }

    pub fn scored(&self, net: &ScoringNetwork, temperature: f64) -> Result<HypothesisPool<RelativePose>> {
        score(net, &self.features, temperature, self.pool.iter().map(|h| h.pose).collect())
    }
}

fn score<H>(net: &ScoringNetwork, features: &[Vec<f64>], temperature: f64, hypotheses: Vec<H>) -> Result<HypothesisPool<H>> {
    let scores = net.score_pool(features)?;
    let probs = gumbel_softmax(&scores, &GumbelConfig { temperature, noise: false }, 0).probs;
    Ok(HypothesisPool {
        hypotheses,
        scores,
        probs,
    })
}

/// Center of the capture volume over a frame window: the mean ground-truth
/// joint position when available, otherwise the mean triangulated joint.
pub fn capture_center(dets: &[DetectionSet], poses: &[Pose], cameras: &[Camera]) -> Result<Point3> {
    let mut sum = Point3::zeros();
    let mut n = 0usize;
    if !poses.is_empty() {
        for x in poses.iter().flat_map(|p| p.iter()) {
            sum += x;
            n += 1;
        }
    } else {
        let projections: Vec<_> = cameras.iter().map(Camera::projection).collect();
        for d in dets {
            for j in 0..d.joint_count() {
                let views = d.valid_views(j);
                let ps: Vec<_> = views.iter().map(|&v| projections[v]).collect();
                let obs: Vec<_> = views.iter().map(|&v| d.keypoints[j][v]).collect();
                sum += triangulate_projections(&ps, &obs)?;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptyPool);
    }
    Ok(sum / n as f64)
}

/// Frame count of one camera sample under `cfg`.
pub fn sample_frame_count(cfg: &TrainConfig, available: usize, rng: &mut impl Rng) -> usize {
    let hi = cfg.frames_per_sample.min(available);
    let lo = cfg.min_frames_per_sample.unwrap_or(cfg.frames_per_sample).min(hi);
    rng.random_range(lo..=hi)
}
