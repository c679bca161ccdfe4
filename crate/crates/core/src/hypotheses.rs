//! Random hypothesis pools for both tasks.

use nalgebra::Matrix3x4;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    decompose_to_pose, eight_point, triangulate_projections, Camera, Correspondence, Point2, RelativePose,
};
use crate::skeleton::Pose;

/// 2D detections of one frame, indexed `[joint][view]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSet {
    pub frame_id: usize,
    pub keypoints: Vec<Vec<Point2>>,
    pub valid: Vec<Vec<bool>>,
}

impl DetectionSet {
    pub fn joint_count(&self) -> usize {
        self.keypoints.len()
    }

    pub fn view_count(&self) -> usize {
        self.keypoints.first().map_or(0, Vec::len)
    }

    pub fn valid_views(&self, joint: usize) -> Vec<usize> {
        self.valid[joint].iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect()
    }

    /// Checks the grid shape and that every joint has two valid views.
    pub fn validate(&self, view_count: usize) -> Result<()> {
        if self.valid.len() != self.keypoints.len() {
            return Err(Error::ShapeMismatch(format!(
                "frame {}: {} keypoint rows, {} validity rows",
                self.frame_id,
                self.keypoints.len(),
                self.valid.len()
            )));
        }
        for (j, (kp, v)) in self.keypoints.iter().zip(&self.valid).enumerate() {
            if kp.len() != view_count || v.len() != view_count {
                return Err(Error::ShapeMismatch(format!(
                    "frame {}, joint {j}: expected {view_count} views",
                    self.frame_id
                )));
            }
            if v.iter().filter(|&&b| b).count() < 2 {
                return Err(Error::NoValidPair { joint: j });
            }
        }
        Ok(())
    }
}

/// A 3D pose with every joint triangulated from its own view subset.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseHypothesis {
    pub pose: Pose,
    /// Sorted view ids used for each joint.
    pub view_subsets: Vec<Vec<usize>>,
}

/// A relative camera pose estimated from a subset of correspondences.
#[derive(Debug, Clone, PartialEq)]
pub struct CamPoseHypothesis {
    pub pose: RelativePose,
    /// `(frame, joint)` of every correspondence used.
    pub corr_subset: Vec<(usize, usize)>,
}

/// Hypotheses with their raw scores and selection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisPool<H> {
    pub hypotheses: Vec<H>,
    pub scores: Vec<f64>,
    pub probs: Vec<f64>,
}

impl<H> HypothesisPool<H> {
    /// Unscored pool with uniform probabilities.
    pub fn new(hypotheses: Vec<H>) -> Self {
        let n = hypotheses.len();
        Self {
            hypotheses,
            scores: vec![0.0; n],
            probs: vec![1.0 / n.max(1) as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

/// Builds `n_pool` pose hypotheses for one frame.
///
/// For each joint the subset size is uniform over `2..=K_valid`, then a
/// uniform subset of that size is drawn from the joint's valid views.
pub fn generate_pose_pool(
    det: &DetectionSet,
    cameras: &[Camera],
    n_pool: usize,
    seed: u64,
) -> Result<Vec<PoseHypothesis>> {
    let projections: Vec<Matrix3x4<f64>> = cameras.iter().map(Camera::projection).collect();
    generate_pose_pool_with(det, &projections, n_pool, seed)
}

/// [`generate_pose_pool`] with precomputed projection matrices.
pub fn generate_pose_pool_with(
    det: &DetectionSet,
    projections: &[Matrix3x4<f64>],
    n_pool: usize,
    seed: u64,
) -> Result<Vec<PoseHypothesis>> {
    det.validate(projections.len())?;
    let valid: Vec<Vec<usize>> = (0..det.joint_count()).map(|j| det.valid_views(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = Vec::with_capacity(n_pool);
    let mut ps = Vec::with_capacity(projections.len());
    let mut obs = Vec::with_capacity(projections.len());
    for _ in 0..n_pool {
        let mut joints = Vec::with_capacity(valid.len());
        let mut subsets = Vec::with_capacity(valid.len());
        for (j, views) in valid.iter().enumerate() {
            let size = rng.random_range(2..=views.len());
            let mut subset: Vec<usize> = sample(&mut rng, views.len(), size).into_iter().map(|i| views[i]).collect();
            subset.sort_unstable();
            ps.clear();
            obs.clear();
            for &v in &subset {
                ps.push(projections[v]);
                obs.push(det.keypoints[j][v]);
            }
            joints.push(triangulate_projections(&ps, &obs)?);
            subsets.push(subset);
        }
        pool.push(PoseHypothesis {
            pose: Pose::new(joints),
            view_subsets: subsets,
        });
    }
    Ok(pool)
}

/// Joint correspondences between two views of a rig over several frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PairObservations {
    pub reference: Camera,
    pub target: Camera,
    /// `(reference pixel, target pixel)` for every jointly valid detection.
    pub corrs: Vec<Correspondence>,
    /// `(frame, joint)` of each entry of `corrs`.
    pub index: Vec<(usize, usize)>,
}

impl PairObservations {
    pub fn new(dets: &[DetectionSet], cameras: &[Camera], ref_view: usize, target_view: usize) -> Result<Self> {
        if ref_view >= cameras.len() || target_view >= cameras.len() || ref_view == target_view {
            return Err(Error::Config(format!(
                "invalid view pair ({ref_view}, {target_view}) for {} cameras",
                cameras.len()
            )));
        }
        let (corrs, index) = pair_correspondences(dets, ref_view, target_view);
        Ok(Self {
            reference: cameras[ref_view].clone(),
            target: cameras[target_view].clone(),
            corrs,
            index,
        })
    }

    /// Ground-truth relative pose of the target view.
    pub fn truth(&self) -> RelativePose {
        RelativePose::between(&self.reference, &self.target)
    }

    /// Distance between the two camera centers (mm); fixes the metric scale
    /// of estimated translations.
    pub fn baseline(&self) -> f64 {
        (self.target.center() - self.reference.center()).norm()
    }
}

/// Correspondences of every joint valid in both views, frame-major.
pub fn pair_correspondences(
    dets: &[DetectionSet],
    ref_view: usize,
    target_view: usize,
) -> (Vec<Correspondence>, Vec<(usize, usize)>) {
    let mut corrs = Vec::new();
    let mut index = Vec::new();
    for (f, d) in dets.iter().enumerate() {
        for j in 0..d.joint_count() {
            if d.valid[j][ref_view] && d.valid[j][target_view] {
                corrs.push((d.keypoints[j][ref_view], d.keypoints[j][target_view]));
                index.push((f, j));
            }
        }
    }
    (corrs, index)
}

/// Default correspondence subset size: `max(16, ceil(0.03 * M * J))`.
pub fn default_subset_size(frames: usize, joints: usize) -> usize {
    16.max((0.03 * (frames * joints) as f64).ceil() as usize)
}

/// Most correspondences a hypothesis checks for cheirality.
const CHEIRALITY_PROBES: usize = 64;

/// Evenly strided subset used to disambiguate the decomposition.
fn cheirality_probes(corrs: &[Correspondence]) -> Vec<Correspondence> {
    let step = corrs.len().div_ceil(CHEIRALITY_PROBES).max(1);
    corrs.iter().step_by(step).copied().collect()
}

/// Builds `n_pool` relative pose hypotheses, each from an independent
/// uniform subset of `subset_size` correspondences.
///
/// Cheirality is checked on at most 64 evenly strided members of the
/// subset. Subsets that are degenerate for the eight-point solve or whose
/// decomposition is ambiguous are redrawn, up to `10 * n_pool` draws.
pub fn generate_camera_pool(
    obs: &PairObservations,
    subset_size: usize,
    n_pool: usize,
    seed: u64,
) -> Result<Vec<CamPoseHypothesis>> {
    let n = obs.corrs.len();
    if subset_size < 8 || subset_size >= n {
        return Err(Error::NotEnoughCorrespondences(n));
    }
    let k1 = obs.reference.intrinsics;
    let k2 = obs.target.intrinsics;
    let baseline = obs.baseline();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = Vec::with_capacity(n_pool);
    let budget = 10 * n_pool;
    let mut attempts = 0;
    let mut subset_corrs = Vec::with_capacity(subset_size);
    while pool.len() < n_pool {
        if attempts == budget {
            return Err(Error::TooManyDegenerate { attempts });
        }
        attempts += 1;
        let mut idx: Vec<usize> = sample(&mut rng, n, subset_size).into_vec();
        idx.sort_unstable();
        subset_corrs.clear();
        subset_corrs.extend(idx.iter().map(|&i| obs.corrs[i]));
        let pose = match eight_point(&subset_corrs).and_then(|f| decompose_to_pose(&f, &k1, &k2, &cheirality_probes(&subset_corrs), baseline)) {
            Ok(p) => p,
            Err(Error::DegenerateConfiguration { .. }) | Err(Error::CheiralityAmbiguous) => continue,
            Err(e) => return Err(e),
        };
        pool.push(CamPoseHypothesis {
            pose,
            corr_subset: idx.iter().map(|&i| obs.index[i]).collect(),
        });
    }
    Ok(pool)
}
