use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::baselines::vanilla_8pt_baseline;
use super::eval::{estimate_relative_pose, evaluate_pose_with_cameras};
use super::pipeline::derive_seed;
use super::report::{Series, Table};
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::geometry::{Camera, RelativePose};
use crate::metrics::{camera_errors, CameraErrors};
use crate::scorer::ScoringNetwork;
use crate::select::SelectionStrategy;
use crate::skeleton::Skeleton;
use crate::synth::Dataset;

/// 3D reconstruction errors of the learned model and the eight-point
/// baseline at one frame count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub frames: usize,
    pub stochastic: Vec<f64>,
    pub baseline: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

/// Sample standard deviation.
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

impl SweepPoint {
    pub fn stochastic_mean(&self) -> f64 {
        mean(&self.stochastic)
    }

    pub fn stochastic_std(&self) -> f64 {
        std_dev(&self.stochastic)
    }

    pub fn baseline_mean(&self) -> f64 {
        mean(&self.baseline)
    }

    pub fn baseline_std(&self) -> f64 {
        std_dev(&self.baseline)
    }
}

/// Mean and spread of E_3D against the number of frames used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSweep {
    pub points: Vec<SweepPoint>,
}

impl FrameSweep {
    pub fn series(&self) -> Series {
        let mut s = Series::new(
            "frame_sweep",
            &["frames", "weight_mean", "weight_std", "8pt_mean", "8pt_std"],
        );
        for p in &self.points {
            s.rows.push(vec![
                p.frames as f64,
                p.stochastic_mean(),
                p.stochastic_std(),
                p.baseline_mean(),
                p.baseline_std(),
            ]);
        }
        s
    }
}

/// For every frame count, `repeats` random windows and random target views
/// are estimated by the weighted strategy and by one eight-point solve.
pub fn frame_count_sweep(
    net: &ScoringNetwork,
    data: &Dataset,
    cfg: &TrainConfig,
    frame_counts: &[usize],
    repeats: usize,
) -> Result<FrameSweep> {
    let k = data.cameras.len();
    let mut points = Vec::with_capacity(frame_counts.len());
    for &m in frame_counts {
        if m == 0 || m > data.detections.len() {
            return Err(Error::Config(format!(
                "frame count {m} outside 1..={}",
                data.detections.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 30, m as u64));
        let mut point = SweepPoint {
            frames: m,
            stochastic: Vec::with_capacity(repeats),
            baseline: Vec::with_capacity(repeats),
        };
        for r in 0..repeats {
            let start = rng.random_range(0..=data.detections.len() - m);
            let mut target = rng.random_range(0..k - 1);
            if target >= cfg.reference_view {
                target += 1;
            }
            let seed = derive_seed(cfg.seed, 31 + m as u64, r as u64);
            let (est, cs) = estimate_relative_pose(net, data, start..start + m, target, SelectionStrategy::Weight, cfg, seed)?;
            point.stochastic.push(cs.error(&est)?);
            point.baseline.push(cs.error(&vanilla_8pt_baseline(&cs.obs)?)?);
        }
        points.push(point);
    }
    Ok(FrameSweep { points })
}

/// Which parts of the extrinsics come from the camera pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrinsics {
    Known,
    EstimatedRotation,
    EstimatedTranslation,
    Estimated,
}

impl Extrinsics {
    pub const ALL: [Extrinsics; 4] = [
        Extrinsics::Known,
        Extrinsics::EstimatedRotation,
        Extrinsics::EstimatedTranslation,
        Extrinsics::Estimated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Extrinsics::Known => "known",
            Extrinsics::EstimatedRotation => "est_r",
            Extrinsics::EstimatedTranslation => "est_t",
            Extrinsics::Estimated => "est_rt",
        }
    }
}

/// Pose MPJPE (weighted strategy) under each extrinsics variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub mpjpe: Vec<(Extrinsics, f64)>,
    /// Errors of the estimated relative pose of every non-reference view.
    pub estimates: Vec<(usize, CameraErrors)>,
}

impl AblationResult {
    pub fn get(&self, e: Extrinsics) -> f64 {
        self.mpjpe.iter().find(|(k, _)| *k == e).map(|(_, v)| *v).expect("all variants present")
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new("extrinsics_ablation", &["mpjpe_mm"]);
        for (e, v) in &self.mpjpe {
            t.push(e.name(), vec![*v]);
        }
        t
    }
}

/// Evaluates the pose model with true, partially estimated and fully
/// estimated extrinsics.
///
/// Every non-reference camera is estimated relative to the reference view
/// from the first `frames_per_sample` frames; rotation and translation of
/// the relative pose are then swapped in separately or together. The
/// detections always come from the true cameras.
pub fn extrinsics_ablation(
    pose_net: &ScoringNetwork,
    cam_net: &ScoringNetwork,
    data: &Dataset,
    skel: &Skeleton,
    pose_cfg: &TrainConfig,
    cam_cfg: &TrainConfig,
) -> Result<AblationResult> {
    let k = data.cameras.len();
    let r = cam_cfg.reference_view;
    let m = cam_cfg.frames_per_sample.min(data.detections.len());
    let reference = &data.cameras[r];
    let mut relative: Vec<Option<(RelativePose, RelativePose)>> = vec![None; k];
    let mut estimates = Vec::new();
    for v in (0..k).filter(|&v| v != r) {
        let seed = derive_seed(cam_cfg.seed, 40, v as u64);
        let (est, cs) = estimate_relative_pose(cam_net, data, 0..m, v, SelectionStrategy::Weight, cam_cfg, seed)?;
        let truth = cs.obs.truth();
        estimates.push((v, camera_errors(&est, &truth, reference, &data.cameras[v], &cs.probes)?));
        relative[v] = Some((est, truth));
    }
    let mut mpjpe = Vec::with_capacity(4);
    for variant in Extrinsics::ALL {
        let cameras: Vec<Camera> = (0..k)
            .map(|v| match relative[v] {
                None => data.cameras[v].clone(),
                Some((est, truth)) => {
                    let rel = match variant {
                        Extrinsics::Known => truth,
                        Extrinsics::EstimatedRotation => RelativePose {
                            rotation: est.rotation,
                            translation: truth.translation,
                        },
                        Extrinsics::EstimatedTranslation => RelativePose {
                            rotation: truth.rotation,
                            translation: est.translation,
                        },
                        Extrinsics::Estimated => est,
                    };
                    rel.target_camera(reference, data.cameras[v].intrinsics, data.cameras[v].id)
                }
            })
            .collect();
        let eval = evaluate_pose_with_cameras(
            pose_net,
            &data.detections,
            &data.poses,
            &cameras,
            skel,
            &[SelectionStrategy::Weight],
            pose_cfg,
            false,
        )?;
        mpjpe.push((variant, eval.rows[0].mpjpe));
    }
    Ok(AblationResult { mpjpe, estimates })
}
