//! Synthetic ground truth: articulated motion, camera rigs, noisy 2D
//! detections and the on-disk dataset format.

mod dataset;
mod motion;
mod render;
mod rig;

pub use dataset::{generate_dataset, Dataset, SynthSpec, FORMAT_NAME, FORMAT_VERSION};
pub use motion::{generate_sequence, template_lengths, template_pose};
pub use render::{render_detections, NoiseSpec};
pub use rig::{Arrangement, RigSpec};
