//! Stochastic hypothesize-score-select estimation.
//!
//! Two tasks share one framework: a pool of random hypotheses is generated
//! from noisy 2D detections, a small fully-connected network scores every
//! hypothesis, the scores are turned into a distribution with a
//! Gumbel-Softmax, and a selection strategy (probability-weighted average
//! by default) produces the estimate.
//!
//! * multi-view 3D human pose triangulation, where each hypothesis
//!   triangulates every joint from a random subset of views;
//! * two-view relative camera pose, where each hypothesis runs the
//!   eight-point algorithm on a random subset of joint correspondences.
//!
//! Ground truth comes from [`synth`], which generates articulated motion,
//! camera rigs and noisy detections. [`harness`] wires everything into
//! training and evaluation runs and hosts the RANSAC and eight-point
//! baselines. Runnable walkthroughs live in the crate's `examples/`.

pub mod error;
pub mod features;
pub mod geometry;
pub mod harness;
pub mod hypotheses;
pub mod metrics;
pub mod scorer;
pub mod select;
pub mod skeleton;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{Camera, Point2, Point3, Quaternion, RelativePose};
pub use skeleton::{Pose, Skeleton};
