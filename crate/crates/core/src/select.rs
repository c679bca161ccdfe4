//! Selection strategies over a scored pool and the three-term training loss.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{quat_weighted_average, Point3, RelativePose};
use crate::hypotheses::{CamPoseHypothesis, HypothesisPool, PoseHypothesis};
use crate::skeleton::Pose;

/// How a single estimate is drawn from a scored pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionStrategy {
    /// Probability-weighted average.
    Weight,
    /// Uniform average.
    Avg,
    /// Highest probability.
    Most,
    /// Lowest probability.
    Least,
    /// Sampled from the probabilities.
    Stoch,
    /// Uniformly random member.
    Random,
    /// Lowest ground-truth error (needs errors).
    Best,
    /// Highest ground-truth error (needs errors).
    Worst,
}

impl SelectionStrategy {
    pub const ALL: [SelectionStrategy; 8] = [
        Self::Weight,
        Self::Avg,
        Self::Most,
        Self::Least,
        Self::Stoch,
        Self::Random,
        Self::Best,
        Self::Worst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Weight => "weight",
            Self::Avg => "avg",
            Self::Most => "most",
            Self::Least => "least",
            Self::Stoch => "stoch",
            Self::Random => "random",
            Self::Best => "best",
            Self::Worst => "worst",
        }
    }

    /// Needs ground truth and so is unavailable at inference.
    pub fn is_oracle(self) -> bool {
        matches!(self, Self::Best | Self::Worst)
    }
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown selection strategy `{s}`")))
    }
}

/// Hypotheses that can be averaged with weights.
pub trait Averageable: Sized + Clone {
    fn weighted_average(items: &[&Self], weights: &[f64]) -> Result<Self>;
}

impl Averageable for Pose {
    fn weighted_average(items: &[&Self], weights: &[f64]) -> Result<Self> {
        check_weights(items.len(), weights)?;
        let j = items[0].len();
        let mut out = vec![Point3::zeros(); j];
        for (p, &w) in items.iter().zip(weights) {
            if p.len() != j {
                return Err(Error::ShapeMismatch("poses with different joint counts".into()));
            }
            for (o, x) in out.iter_mut().zip(p.iter()) {
                *o += x * w;
            }
        }
        Ok(Pose::new(out))
    }
}

impl Averageable for RelativePose {
    /// Quaternion average for the rotation, arithmetic mean for the
    /// translation.
    fn weighted_average(items: &[&Self], weights: &[f64]) -> Result<Self> {
        check_weights(items.len(), weights)?;
        let quats: Vec<_> = items.iter().map(|h| h.rotation).collect();
        let rotation = quat_weighted_average(&quats, weights)?;
        let translation = items
            .iter()
            .zip(weights)
            .fold(Point3::zeros(), |acc, (h, &w)| acc + h.translation * w);
        Ok(RelativePose { rotation, translation })
    }
}

impl Averageable for PoseHypothesis {
    fn weighted_average(items: &[&Self], weights: &[f64]) -> Result<Self> {
        let poses: Vec<&Pose> = items.iter().map(|h| &h.pose).collect();
        Ok(PoseHypothesis {
            pose: Pose::weighted_average(&poses, weights)?,
            view_subsets: Vec::new(),
        })
    }
}

impl Averageable for CamPoseHypothesis {
    fn weighted_average(items: &[&Self], weights: &[f64]) -> Result<Self> {
        let poses: Vec<&RelativePose> = items.iter().map(|h| &h.pose).collect();
        Ok(CamPoseHypothesis {
            pose: RelativePose::weighted_average(&poses, weights)?,
            corr_subset: Vec::new(),
        })
    }
}

fn check_weights(n: usize, weights: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyPool);
    }
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: weights.len(),
        });
    }
    Ok(())
}

/// Index of the first maximum (`max = true`) or minimum.
fn arg_extreme(values: &[f64], max: bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        let better = if max { v > values[best] } else { v < values[best] };
        if better {
            best = i;
        }
    }
    best
}

/// Draws an index from a categorical distribution.
fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Index chosen by an index-based strategy, `None` for the averaging ones.
pub fn select_index<H>(
    pool: &HypothesisPool<H>,
    strategy: SelectionStrategy,
    errors: Option<&[f64]>,
    seed: u64,
) -> Result<Option<usize>> {
    let n = pool.len();
    if n == 0 {
        return Err(Error::EmptyPool);
    }
    if pool.probs.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: pool.probs.len(),
        });
    }
    let oracle = |name| -> Result<&[f64]> {
        let e = errors.ok_or(Error::MissingErrors(name))?;
        if e.len() != n {
            return Err(Error::LengthMismatch { left: n, right: e.len() });
        }
        Ok(e)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match strategy {
        SelectionStrategy::Weight | SelectionStrategy::Avg => None,
        SelectionStrategy::Most => Some(arg_extreme(&pool.probs, true)),
        SelectionStrategy::Least => Some(arg_extreme(&pool.probs, false)),
        SelectionStrategy::Stoch => Some(sample_index(&pool.probs, &mut rng)),
        SelectionStrategy::Random => Some(rng.random_range(0..n)),
        SelectionStrategy::Best => Some(arg_extreme(oracle("best")?, false)),
        SelectionStrategy::Worst => Some(arg_extreme(oracle("worst")?, true)),
    })
}

/// Applies a selection strategy to a scored pool.
///
/// `errors` holds the per-hypothesis ground-truth error and is required by
/// the oracle strategies only. Ties go to the lowest index.
pub fn select<H: Averageable>(
    pool: &HypothesisPool<H>,
    strategy: SelectionStrategy,
    errors: Option<&[f64]>,
    seed: u64,
) -> Result<H> {
    match select_index(pool, strategy, errors, seed)? {
        Some(i) => Ok(pool.hypotheses[i].clone()),
        None => {
            let refs: Vec<&H> = pool.hypotheses.iter().collect();
            let weights = if strategy == SelectionStrategy::Avg {
                vec![1.0 / pool.len() as f64; pool.len()]
            } else {
                pool.probs.clone()
            };
            H::weighted_average(&refs, &weights)
        }
    }
}

/// Weights of the three loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LossWeights {
    pub fn pose() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.01,
            gamma: 0.02,
        }
    }

    pub fn camera() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.01,
            gamma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.alpha, self.beta, self.gamma].iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("loss weights must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Expected error under the hypothesis distribution.
pub fn stochastic_loss(errors: &[f64], probs: &[f64]) -> Result<f64> {
    if errors.len() != probs.len() {
        return Err(Error::LengthMismatch {
            left: errors.len(),
            right: probs.len(),
        });
    }
    Ok(errors.iter().zip(probs).map(|(e, p)| e * p).sum())
}

const ENTROPY_FLOOR: f64 = 1e-12;

/// Shannon entropy in nats; entries below `1e-12` contribute nothing.
pub fn entropy_loss(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p >= ENTROPY_FLOOR)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Gradient of [`entropy_loss`] with respect to each probability.
pub fn entropy_grad(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .map(|&p| if p >= ENTROPY_FLOOR { -(p.ln() + 1.0) } else { 0.0 })
        .collect()
}

/// Error of the selected estimate, passed through unchanged.
pub fn estimation_loss(selected_error: f64) -> f64 {
    selected_error
}

pub fn total_loss(l_stoch: f64, l_entropy: f64, l_est: f64, w: &LossWeights) -> f64 {
    w.alpha * l_stoch + w.beta * l_entropy + w.gamma * l_est
}

/// MPJPE of the probability-weighted pose and its gradient with respect to
/// each probability.
pub fn weighted_pose_error_grad(poses: &[&[Point3]], probs: &[f64], truth: &[Point3]) -> Result<(f64, Vec<f64>)> {
    check_weights(poses.len(), probs)?;
    let j = truth.len();
    let mut est = vec![Point3::zeros(); j];
    for (p, &w) in poses.iter().zip(probs) {
        if p.len() != j {
            return Err(Error::ShapeMismatch("pose and truth joint counts differ".into()));
        }
        for (e, x) in est.iter_mut().zip(p.iter()) {
            *e += x * w;
        }
    }
    let mut err = 0.0;
    let mut dirs = Vec::with_capacity(j);
    for (e, t) in est.iter().zip(truth) {
        let d = e - t;
        let n = d.norm();
        err += n;
        dirs.push(if n > 0.0 { d / n } else { Point3::zeros() });
    }
    let grad = poses
        .iter()
        .map(|p| p.iter().zip(&dirs).map(|(x, u)| x.dot(u)).sum::<f64>() / j as f64)
        .collect();
    Ok((err / j as f64, grad))
}
