use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::default_subset_size;
use crate::scorer::{GumbelConfig, Optimizer, Task};
use crate::select::{LossWeights, SelectionStrategy};
use crate::synth::{Arrangement, NoiseSpec, RigSpec, SynthSpec};

use super::pipeline::derive_seed;

/// Training and evaluation settings for one task.
///
/// Read from a flat TOML document; keys not given fall back to the task
/// defaults and unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub task: Task,
    /// Number of training samples (one frame or frame window each).
    pub iterations: usize,
    /// Samples whose gradients are averaged into one optimizer step.
    pub batch_size: usize,
    pub pool_size: usize,
    pub learning_rate: f64,
    pub temperature: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Strategy whose error forms the estimation loss term.
    pub est_strategy: SelectionStrategy,
    pub optimizer: Optimizer,
    pub hidden: Vec<usize>,
    /// Multiplies network inputs (features are in mm).
    pub input_scale: f64,
    pub seed: u64,
    /// Frames per camera sample (M).
    pub frames_per_sample: usize,
    /// Lower end of the per-sample frame count; equal to
    /// `frames_per_sample` unless set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_frames_per_sample: Option<usize>,
    /// Correspondences per camera hypothesis (T). When unset, T is
    /// `subset_fraction * M * J` if that is set, else `max(16, 0.03 * M * J)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_fraction: Option<f64>,
    /// Width the sorted ray-distance feature is resampled to.
    pub feature_width: usize,
    pub reference_view: usize,
    /// Random 3D probes for the camera metrics.
    pub probe_count: usize,
    pub ransac_threshold_px: f64,
    pub ransac_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl TrainConfig {
    pub fn pose() -> Self {
        let w = LossWeights::pose();
        Self {
            task: Task::Pose,
            iterations: 500,
            batch_size: 16,
            pool_size: 200,
            learning_rate: 5e-4,
            temperature: 1.5,
            alpha: w.alpha,
            beta: w.beta,
            gamma: w.gamma,
            est_strategy: SelectionStrategy::Weight,
            optimizer: Optimizer::Adam,
            hidden: Task::Pose.default_hidden().to_vec(),
            input_scale: 1e-3,
            seed: 0,
            frames_per_sample: 80,
            min_frames_per_sample: None,
            subset_size: None,
            subset_fraction: None,
            feature_width: 80 * 17,
            reference_view: 0,
            probe_count: 100,
            ransac_threshold_px: 10.0,
            ransac_iterations: 50,
            dataset: None,
            out: None,
        }
    }

    pub fn camera() -> Self {
        let w = LossWeights::camera();
        Self {
            task: Task::Camera,
            pool_size: 100,
            learning_rate: 1e-5,
            temperature: 1.2,
            alpha: w.alpha,
            beta: w.beta,
            gamma: w.gamma,
            hidden: Task::Camera.default_hidden().to_vec(),
            input_scale: 1e-2,
            ..Self::pose()
        }
    }

    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Pose => Self::pose(),
            Task::Camera => Self::camera(),
        }
    }

    /// Parses a TOML document over the defaults of `task` (or of the task
    /// named in the document).
    pub fn from_toml(text: &str, task: Option<Task>) -> Result<Self> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let named = match doc.get("task") {
            Some(v) => Some(
                v.clone()
                    .try_into::<Task>()
                    .map_err(|_| Error::Config(format!("task: expected `pose` or `camera`, got {v}")))?,
            ),
            None => None,
        };
        let task = match (task, named) {
            (Some(a), Some(b)) if a != b => return Err(Error::TaskMismatch { expected: a, got: b }),
            (a, b) => a.or(b).ok_or_else(|| Error::Config("task: missing".into()))?,
        };
        let mut merged = toml::Table::try_from(Self::for_task(task)).expect("defaults serialize");
        merged.extend(doc);
        let cfg: Self = merged.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, task: Option<Task>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, task).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.pool_size == 0 {
            return bad("pool_size must be positive");
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be nonnegative");
        }
        self.gumbel().validate()?;
        self.loss_weights().validate()?;
        if self.hidden.iter().any(|&h| h == 0) {
            return bad("hidden widths must be positive");
        }
        if !(self.input_scale > 0.0) || !self.input_scale.is_finite() {
            return bad("input_scale must be positive");
        }
        if self.frames_per_sample == 0 || self.feature_width == 0 || self.probe_count == 0 {
            return bad("frames_per_sample, feature_width and probe_count must be positive");
        }
        if let Some(m) = self.min_frames_per_sample {
            if m == 0 || m > self.frames_per_sample {
                return bad("min_frames_per_sample must lie in 1..=frames_per_sample");
            }
        }
        if let Some(f) = self.subset_fraction {
            if !(f > 0.0 && f < 1.0) {
                return bad("subset_fraction must lie in (0, 1)");
            }
        }
        if let Some(t) = self.subset_size {
            if t < 8 {
                return bad("subset_size must be at least 8");
            }
        }
        if !(self.ransac_threshold_px >= 0.0) || self.ransac_iterations == 0 {
            return bad("ransac_threshold_px must be nonnegative and ransac_iterations positive");
        }
        Ok(())
    }

    pub fn gumbel(&self) -> GumbelConfig {
        GumbelConfig {
            temperature: self.temperature,
            noise: true,
        }
    }

    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
        }
    }

    pub fn subset_size_for(&self, frames: usize, joints: usize) -> usize {
        match (self.subset_size, self.subset_fraction) {
            (Some(t), _) => t,
            (None, Some(f)) => 8.max((f * (frames * joints) as f64).ceil() as usize),
            (None, None) => default_subset_size(frames, joints),
        }
    }

    pub fn require_task(&self, task: Task) -> Result<()> {
        if self.task != task {
            return Err(Error::TaskMismatch {
                expected: task,
                got: self.task,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RigKind {
    Ring,
    Arc,
    Dome,
}

/// Flat description of a synthetic dataset, as read by the `synth` command.
///
/// Rig placement, motion and noise each draw from their own stream of
/// `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub arrangement: RigKind,
    pub cameras: usize,
    pub frames: usize,
    pub arc_span_deg: f64,
    pub radius: f64,
    pub focal_px: f64,
    pub pixel_sigma: f64,
    pub outlier_rate: f64,
    pub outlier_magnitude: f64,
    pub occlusion_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            arrangement: RigKind::Ring,
            cameras: 7,
            frames: 400,
            arc_span_deg: 150.0,
            radius: 4000.0,
            focal_px: 1000.0,
            pixel_sigma: 3.0,
            outlier_rate: 0.0,
            outlier_magnitude: 0.0,
            occlusion_rate: 0.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.spec()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn spec(&self) -> Result<SynthSpec> {
        if self.frames == 0 {
            return Err(Error::Config("frames must be positive".into()));
        }
        if !(self.focal_px > 0.0) {
            return Err(Error::Config("focal_px must be positive".into()));
        }
        let mut rig = RigSpec::ring(self.cameras).with_seed(derive_seed(self.seed, 50, 0));
        rig.arrangement = match self.arrangement {
            RigKind::Ring => Arrangement::Ring,
            RigKind::Arc => Arrangement::Arc {
                span_deg: self.arc_span_deg,
            },
            RigKind::Dome => Arrangement::Dome,
        };
        rig.radius = self.radius;
        rig.focal_px = self.focal_px;
        let noise = NoiseSpec {
            pixel_sigma: self.pixel_sigma,
            outlier_rate: self.outlier_rate,
            outlier_magnitude: self.outlier_magnitude,
            occlusion_rate: self.occlusion_rate,
            seed: derive_seed(self.seed, 52, 0),
        };
        noise.validate()?;
        Ok(SynthSpec {
            rig,
            frames: self.frames,
            motion_seed: derive_seed(self.seed, 51, 0),
            noise,
        })
    }
}
