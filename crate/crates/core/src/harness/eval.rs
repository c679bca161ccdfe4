use serde::{Deserialize, Serialize};

use super::baselines::{ransac_triangulation_baseline, vanilla_8pt_baseline};
use super::pipeline::{capture_center, derive_seed, CameraSample, PoseSample};
use super::report::Table;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::geometry::{Camera, RelativePose};
use crate::hypotheses::{DetectionSet, PairObservations};
use crate::metrics::{camera_errors, mpjpe, pose_prior_variance, CameraErrors};
use crate::scorer::{ScoringNetwork, Task};
use crate::select::{select, SelectionStrategy};
use crate::skeleton::{Pose, Skeleton, PAIR_NAMES};
use crate::synth::Dataset;

pub const RANSAC_ROW: &str = "ransac";
pub const EIGHT_POINT_ROW: &str = "8pt";

/// MPJPE and pose prior of one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRow {
    pub name: String,
    pub mpjpe: f64,
    /// Left/right ratio variance per symmetric pair (empty below 2 frames).
    pub pose_prior: Vec<f64>,
    pub per_frame: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseEvaluation {
    pub rows: Vec<PoseRow>,
}

impl PoseEvaluation {
    pub fn row(&self, name: &str) -> Option<&PoseRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn mpjpe(&self, name: &str) -> Option<f64> {
        self.row(name).map(|r| r.mpjpe)
    }

    pub fn mpjpe_table(&self) -> Table {
        let mut t = Table::new("mpjpe", &["mpjpe_mm"]);
        for r in &self.rows {
            t.push(r.name.clone(), vec![r.mpjpe]);
        }
        t
    }

    pub fn prior_table(&self) -> Table {
        let mut t = Table::new("pose_prior", &PAIR_NAMES);
        for r in self.rows.iter().filter(|r| !r.pose_prior.is_empty()) {
            t.push(r.name.clone(), r.pose_prior.clone());
        }
        t
    }
}

fn require(net: &ScoringNetwork, task: Task) -> Result<()> {
    if net.task != task {
        return Err(Error::TaskMismatch {
            expected: task,
            got: net.task,
        });
    }
    Ok(())
}

/// Scores every frame of `data` and reports each strategy, optionally with
/// the RANSAC baseline as an extra row.
pub fn evaluate_pose(
    net: &ScoringNetwork,
    data: &Dataset,
    skel: &Skeleton,
    strategies: &[SelectionStrategy],
    cfg: &TrainConfig,
    with_ransac: bool,
) -> Result<PoseEvaluation> {
    evaluate_pose_with_cameras(net, &data.detections, &data.poses, &data.cameras, skel, strategies, cfg, with_ransac)
}

/// [`evaluate_pose`] triangulating with `cameras`, which may differ from the
/// cameras that produced the detections.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_pose_with_cameras(
    net: &ScoringNetwork,
    dets: &[DetectionSet],
    truth: &[Pose],
    cameras: &[Camera],
    skel: &Skeleton,
    strategies: &[SelectionStrategy],
    cfg: &TrainConfig,
    with_ransac: bool,
) -> Result<PoseEvaluation> {
    require(net, Task::Pose)?;
    if truth.len() != dets.len() || dets.is_empty() {
        return Err(Error::dataset("<memory>", "evaluation needs ground-truth poses for every frame"));
    }
    let projections: Vec<_> = cameras.iter().map(Camera::projection).collect();
    let mut estimates: Vec<Vec<Pose>> = vec![Vec::with_capacity(dets.len()); strategies.len()];
    let mut ransac = Vec::new();
    for (f, det) in dets.iter().enumerate() {
        let f64_ = f as u64;
        let ps = PoseSample::new(det, &projections, skel, cfg.pool_size, derive_seed(cfg.seed, 10, f64_))?;
        let pool = ps.scored(net, cfg.temperature)?;
        let errors = ps.errors(&truth[f])?;
        for (k, &s) in strategies.iter().enumerate() {
            estimates[k].push(select(&pool, s, Some(&errors), derive_seed(cfg.seed, 11, f64_))?);
        }
        if with_ransac {
            ransac.push(ransac_triangulation_baseline(
                det,
                cameras,
                cfg.ransac_threshold_px,
                cfg.ransac_iterations,
                derive_seed(cfg.seed, 12, f64_),
            )?);
        }
    }
    let mut names: Vec<String> = strategies.iter().map(|s| s.name().to_string()).collect();
    if with_ransac {
        names.push(RANSAC_ROW.into());
        estimates.push(ransac);
    }
    let rows = names
        .into_iter()
        .zip(estimates)
        .map(|(name, seq)| {
            let per_frame = seq.iter().zip(truth).map(|(e, t)| mpjpe(e, t)).collect::<Result<Vec<_>>>()?;
            let pose_prior = if seq.len() >= 2 { pose_prior_variance(&seq, skel)? } else { Vec::new() };
            Ok(PoseRow {
                name,
                mpjpe: per_frame.iter().sum::<f64>() / per_frame.len() as f64,
                pose_prior,
                per_frame,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PoseEvaluation { rows })
}

/// Mean camera errors of one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRow {
    pub name: String,
    pub errors: CameraErrors,
}

/// Weighted-strategy and eight-point errors of one view pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub reference_view: usize,
    pub target_view: usize,
    pub stochastic: CameraErrors,
    pub eight_point: CameraErrors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraEvaluation {
    pub rows: Vec<CameraRow>,
    pub pairs: Vec<PairRow>,
}

const CAMERA_COLUMNS: [&str; 4] = ["E_R", "E_t_mm", "E_2D_px", "E_3D_mm"];

fn error_values(e: &CameraErrors) -> Vec<f64> {
    vec![e.rotation, e.translation, e.reprojection_2d, e.reconstruction_3d]
}

fn mean_errors(all: &[CameraErrors]) -> CameraErrors {
    let n = all.len().max(1) as f64;
    CameraErrors {
        rotation: all.iter().map(|e| e.rotation).sum::<f64>() / n,
        translation: all.iter().map(|e| e.translation).sum::<f64>() / n,
        reprojection_2d: all.iter().map(|e| e.reprojection_2d).sum::<f64>() / n,
        reconstruction_3d: all.iter().map(|e| e.reconstruction_3d).sum::<f64>() / n,
    }
}

impl CameraEvaluation {
    pub fn row(&self, name: &str) -> Option<&CameraErrors> {
        self.rows.iter().find(|r| r.name == name).map(|r| &r.errors)
    }

    pub fn strategy_table(&self) -> Table {
        let mut t = Table::new("camera_errors", &CAMERA_COLUMNS);
        for r in &self.rows {
            t.push(r.name.clone(), error_values(&r.errors));
        }
        t
    }

    pub fn pair_table(&self) -> Table {
        let cols: Vec<String> = CAMERA_COLUMNS
            .iter()
            .map(|c| format!("weight_{c}"))
            .chain(CAMERA_COLUMNS.iter().map(|c| format!("8pt_{c}")))
            .collect();
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut t = Table::new("camera_pairs", &cols);
        for p in &self.pairs {
            let mut v = error_values(&p.stochastic);
            v.extend(error_values(&p.eight_point));
            t.push(format!("({}, {})", p.reference_view, p.target_view), v);
        }
        t
    }
}

/// Frame windows of `m` consecutive frames covering `len` frames.
fn windows(len: usize, m: usize) -> Vec<std::ops::Range<usize>> {
    let m = m.min(len).max(1);
    (0..len / m).map(|i| i * m..(i + 1) * m).collect()
}

/// Estimates the relative pose of one view pair over a frame window with
/// the chosen strategy.
pub fn estimate_relative_pose(
    net: &ScoringNetwork,
    data: &Dataset,
    window: std::ops::Range<usize>,
    target_view: usize,
    strategy: SelectionStrategy,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(RelativePose, CameraSample)> {
    require(net, Task::Camera)?;
    if strategy.is_oracle() {
        return Err(Error::MissingErrors(strategy.name()));
    }
    let m = window.len();
    let obs = PairObservations::new(&data.detections[window.clone()], &data.cameras, cfg.reference_view, target_view)?;
    let poses = if data.poses.len() == data.detections.len() { &data.poses[window.clone()] } else { &[][..] };
    let center = capture_center(&data.detections[window], poses, &data.cameras)?;
    let cs = CameraSample::new(obs, cfg, m, data.joint_count(), &center, seed)?;
    let pool = cs.scored(net, cfg.temperature)?;
    Ok((select(&pool, strategy, None, derive_seed(seed, 2, 0))?, cs))
}

/// Per-strategy camera errors for every target view against the reference
/// view, over consecutive windows of `frames_per_sample` frames, with the
/// eight-point baseline as an extra row.
pub fn evaluate_camera(
    net: &ScoringNetwork,
    data: &Dataset,
    strategies: &[SelectionStrategy],
    cfg: &TrainConfig,
) -> Result<CameraEvaluation> {
    require(net, Task::Camera)?;
    let k = data.cameras.len();
    if cfg.reference_view >= k {
        return Err(Error::Config(format!("reference_view {} out of range for {k} cameras", cfg.reference_view)));
    }
    let mut per_strategy: Vec<Vec<CameraErrors>> = vec![Vec::new(); strategies.len()];
    let mut baseline_all = Vec::new();
    let mut pairs = Vec::new();
    let wins = windows(data.detections.len(), cfg.frames_per_sample);
    for target in (0..k).filter(|&v| v != cfg.reference_view) {
        let mut weight_pair = Vec::new();
        let mut base_pair = Vec::new();
        for (w, win) in wins.iter().enumerate() {
            let seed = derive_seed(cfg.seed, 20 + target as u64, w as u64);
            let m = win.len();
            let obs = PairObservations::new(&data.detections[win.clone()], &data.cameras, cfg.reference_view, target)?;
            let poses = if data.poses.len() == data.detections.len() { &data.poses[win.clone()] } else { &[][..] };
            let center = capture_center(&data.detections[win.clone()], poses, &data.cameras)?;
            let cs = CameraSample::new(obs, cfg, m, data.joint_count(), &center, seed)?;
            let truth = cs.obs.truth();
            let pool = cs.scored(net, cfg.temperature)?;
            let errors = cs.errors()?;
            let measure = |p: &RelativePose| camera_errors(p, &truth, &cs.obs.reference, &cs.obs.target, &cs.probes);
            for (k, &s) in strategies.iter().enumerate() {
                let est = select(&pool, s, Some(&errors), derive_seed(seed, 3, 0))?;
                per_strategy[k].push(measure(&est)?);
            }
            let weight = select(&pool, SelectionStrategy::Weight, None, 0)?;
            weight_pair.push(measure(&weight)?);
            let base = measure(&vanilla_8pt_baseline(&cs.obs)?)?;
            base_pair.push(base);
            baseline_all.push(base);
        }
        pairs.push(PairRow {
            reference_view: cfg.reference_view,
            target_view: target,
            stochastic: mean_errors(&weight_pair),
            eight_point: mean_errors(&base_pair),
        });
    }
    let mut rows: Vec<CameraRow> = strategies
        .iter()
        .zip(&per_strategy)
        .map(|(s, e)| CameraRow {
            name: s.name().into(),
            errors: mean_errors(e),
        })
        .collect();
    rows.push(CameraRow {
        name: EIGHT_POINT_ROW.into(),
        errors: mean_errors(&baseline_all),
    });
    Ok(CameraEvaluation { rows, pairs })
}
