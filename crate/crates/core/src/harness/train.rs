use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pipeline::{capture_center, derive_seed, sample_frame_count, CameraSample, PoseSample};
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::features::pose_feature_width;
use crate::geometry::{Camera, Point3, RelativePose};
use crate::hypotheses::{HypothesisPool, PairObservations};
use crate::scorer::{gumbel_softmax, GumbelSample, Gradients, ScoringNetwork, Task};
use crate::select::{
    entropy_grad, entropy_loss, estimation_loss, select, select_index, stochastic_loss, total_loss,
    weighted_pose_error_grad, Averageable, SelectionStrategy,
};
use crate::skeleton::{Pose, Skeleton};
use crate::synth::Dataset;

/// Loss terms of one training sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub sample: usize,
    pub total: f64,
    pub stochastic: f64,
    pub entropy: f64,
    pub estimation: f64,
}

/// Loss history and optimizer step count of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub task: Task,
    pub steps: usize,
    pub losses: Vec<LossRecord>,
}

impl TrainReport {
    /// Mean total loss over a trailing window ending at `end` (exclusive).
    pub fn smoothed_loss(&self, end: usize, window: usize) -> f64 {
        let end = end.min(self.losses.len());
        let start = end.saturating_sub(window);
        let slice = &self.losses[start..end];
        slice.iter().map(|l| l.total).sum::<f64>() / slice.len().max(1) as f64
    }
}

/// Fresh network shaped by `cfg`.
pub fn init_network(cfg: &TrainConfig, input_width: usize) -> ScoringNetwork {
    ScoringNetwork::new(cfg.task, input_width, &cfg.hidden, cfg.input_scale, derive_seed(cfg.seed, 7, 0))
}

/// Gradient on the probabilities of the total loss, plus the loss terms.
fn assemble_loss(
    sample: &GumbelSample,
    errors: &[f64],
    est: (f64, Vec<f64>),
    cfg: &TrainConfig,
    index: usize,
) -> Result<(LossRecord, Vec<f64>)> {
    let w = cfg.loss_weights();
    let probs = &sample.probs;
    let l_stoch = stochastic_loss(errors, probs)?;
    let l_ent = entropy_loss(probs);
    let l_est = estimation_loss(est.0);
    let ent_grad = entropy_grad(probs);
    let dprobs = (0..probs.len())
        .map(|i| w.alpha * errors[i] + w.beta * ent_grad[i] + w.gamma * est.1[i])
        .collect();
    let record = LossRecord {
        sample: index,
        total: total_loss(l_stoch, l_ent, l_est, &w),
        stochastic: l_stoch,
        entropy: l_ent,
        estimation: l_est,
    };
    Ok((record, dprobs))
}

/// Error of the estimation strategy and its gradient on the probabilities.
/// Index-based strategies are piecewise constant and get a zero gradient.
fn estimation_term<H: Averageable>(
    hypotheses: &[H],
    probs: &[f64],
    errors: &[f64],
    strategy: SelectionStrategy,
    seed: u64,
    error_of: impl Fn(&H) -> Result<f64>,
) -> Result<(f64, Vec<f64>)> {
    let pool = HypothesisPool {
        hypotheses: hypotheses.to_vec(),
        scores: vec![0.0; hypotheses.len()],
        probs: probs.to_vec(),
    };
    let zero = vec![0.0; probs.len()];
    match select_index(&pool, strategy, Some(errors), seed)? {
        Some(i) => Ok((errors[i], zero)),
        None => Ok((error_of(&select(&pool, strategy, Some(errors), seed)?)?, zero)),
    }
}

fn run_training(
    cfg: &TrainConfig,
    net: &mut ScoringNetwork,
    mut sample: impl FnMut(&mut ScoringNetwork, usize, &mut ChaCha8Rng) -> Result<(LossRecord, Gradients)>,
) -> Result<TrainReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1, 0));
    let mut losses = Vec::with_capacity(cfg.iterations);
    let mut acc = net.zero_gradients();
    let mut pending = 0usize;
    let mut steps = 0usize;
    for i in 0..cfg.iterations {
        let (record, grads) = sample(net, i, &mut rng)?;
        if !record.total.is_finite() {
            return Err(Error::ShapeMismatch(format!("non-finite loss at sample {i}")));
        }
        losses.push(record);
        acc.add_assign(&grads)?;
        pending += 1;
        if pending == cfg.batch_size || i + 1 == cfg.iterations {
            acc.scale(1.0 / pending as f64);
            net.step(&acc, cfg.learning_rate, cfg.optimizer)?;
            acc = net.zero_gradients();
            pending = 0;
            steps += 1;
        }
    }
    Ok(TrainReport {
        task: cfg.task,
        steps,
        losses,
    })
}

/// Trains a pose scoring network on random frames of `data`.
pub fn train_pose(cfg: &TrainConfig, data: &Dataset, skel: &Skeleton) -> Result<(ScoringNetwork, TrainReport)> {
    let mut net = init_network(cfg, pose_feature_width(skel));
    let report = train_pose_from(cfg, data, skel, &mut net)?;
    Ok((net, report))
}

/// Continues training an existing pose network.
pub fn train_pose_from(cfg: &TrainConfig, data: &Dataset, skel: &Skeleton, net: &mut ScoringNetwork) -> Result<TrainReport> {
    cfg.validate()?;
    cfg.require_task(Task::Pose)?;
    if net.task != Task::Pose {
        return Err(Error::TaskMismatch {
            expected: Task::Pose,
            got: net.task,
        });
    }
    check_ground_truth(data)?;
    let projections: Vec<_> = data.cameras.iter().map(Camera::projection).collect();
    run_training(cfg, net, |net, i, rng| {
        let f = rng.random_range(0..data.detections.len());
        let ps = PoseSample::new(&data.detections[f], &projections, skel, cfg.pool_size, derive_seed(cfg.seed, 2, i as u64))?;
        let seeds = (derive_seed(cfg.seed, 3, i as u64), derive_seed(cfg.seed, 4, i as u64));
        let (mut record, grads) = pose_sample_gradients(net, &ps, &data.poses[f], cfg, seeds)?;
        record.sample = i;
        Ok((record, grads))
    })
}

/// Loss terms and parameter gradients of one pose sample. `seeds` drive the
/// Gumbel noise and the estimation strategy.
pub fn pose_sample_gradients(
    net: &mut ScoringNetwork,
    ps: &PoseSample,
    truth: &[Point3],
    cfg: &TrainConfig,
    seeds: (u64, u64),
) -> Result<(LossRecord, Gradients)> {
    let errors = ps.errors(truth)?;
    let logits = net.forward_pool(&ps.features)?;
    let g = gumbel_softmax(&logits, &cfg.gumbel(), seeds.0);
    let est = if cfg.est_strategy == SelectionStrategy::Weight {
        weighted_pose_error_grad(&ps.poses(), &g.probs, truth)?
    } else {
        let poses: Vec<Pose> = ps.pool.iter().map(|h| h.pose.clone()).collect();
        estimation_term(&poses, &g.probs, &errors, cfg.est_strategy, seeds.1, |p| crate::metrics::mpjpe(p, truth))?
    };
    let (record, dprobs) = assemble_loss(&g, &errors, est, cfg, 0)?;
    let grads = net.backward(&g.backward(&dprobs)?)?;
    Ok((record, grads))
}

/// Trains a camera scoring network on random frame windows of `data`, each
/// paired with a random target view against the reference view.
pub fn train_cam(cfg: &TrainConfig, data: &Dataset) -> Result<(ScoringNetwork, TrainReport)> {
    let mut net = init_network(cfg, cfg.feature_width);
    let report = train_cam_from(cfg, data, &mut net)?;
    Ok((net, report))
}

/// Continues training an existing camera network.
pub fn train_cam_from(cfg: &TrainConfig, data: &Dataset, net: &mut ScoringNetwork) -> Result<TrainReport> {
    cfg.validate()?;
    cfg.require_task(Task::Camera)?;
    if net.task != Task::Camera {
        return Err(Error::TaskMismatch {
            expected: Task::Camera,
            got: net.task,
        });
    }
    check_ground_truth(data)?;
    let k = data.cameras.len();
    if cfg.reference_view >= k {
        return Err(Error::Config(format!("reference_view {} out of range for {k} cameras", cfg.reference_view)));
    }
    let joints = data.joint_count();
    let gumbel = cfg.gumbel();
    run_training(cfg, net, |net, i, rng| {
        let m = sample_frame_count(cfg, data.detections.len(), rng);
        let start = rng.random_range(0..=data.detections.len() - m);
        let mut target = rng.random_range(0..k - 1);
        if target >= cfg.reference_view {
            target += 1;
        }
        let window = start..start + m;
        let obs = PairObservations::new(&data.detections[window.clone()], &data.cameras, cfg.reference_view, target)?;
        let center = capture_center(&data.detections[window.clone()], &data.poses[window], &data.cameras)?;
        let cs = CameraSample::new(obs, cfg, m, joints, &center, derive_seed(cfg.seed, 2, i as u64))?;
        let errors = cs.errors()?;
        let logits = net.forward_pool(&cs.features)?;
        let g = gumbel_softmax(&logits, &gumbel, derive_seed(cfg.seed, 3, i as u64));
        let poses: Vec<RelativePose> = cs.pool.iter().map(|h| h.pose).collect();
        let est_seed = derive_seed(cfg.seed, 4, i as u64);
        let mut est = estimation_term(&poses, &g.probs, &errors, cfg.est_strategy, est_seed, |p| cs.error(p))?;
        if cfg.gamma != 0.0 && cfg.est_strategy == SelectionStrategy::Weight {
            est.1 = weighted_camera_error_grad(&cs, &poses, &g.probs)?;
        }
        let (record, dprobs) = assemble_loss(&g, &errors, est, cfg, i)?;
        let grads = net.backward(&g.backward(&dprobs)?)?;
        Ok((record, grads))
    })
}

/// Central-difference gradient of the weighted camera estimate's error with
/// respect to each probability.
fn weighted_camera_error_grad(cs: &CameraSample, poses: &[RelativePose], probs: &[f64]) -> Result<Vec<f64>> {
    const H: f64 = 1e-6;
    let refs: Vec<&RelativePose> = poses.iter().collect();
    let err_at = |w: &[f64]| -> Result<f64> { cs.error(&RelativePose::weighted_average(&refs, w)?) };
    let mut w = probs.to_vec();
    let mut grad = Vec::with_capacity(probs.len());
    for i in 0..probs.len() {
        w[i] = probs[i] + H;
        let up = err_at(&w)?;
        w[i] = probs[i] - H;
        let down = err_at(&w)?;
        w[i] = probs[i];
        grad.push((up - down) / (2.0 * H));
    }
    Ok(grad)
}

fn check_ground_truth(data: &Dataset) -> Result<()> {
    if data.detections.is_empty() || data.poses.len() != data.detections.len() {
        return Err(Error::dataset("<memory>", "training needs ground-truth poses for every frame"));
    }
    Ok(())
}
