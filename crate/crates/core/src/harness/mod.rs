//! Training loops, evaluation, baselines and report emission.

mod baselines;
mod config;
mod eval;
mod experiments;
pub mod pipeline;
mod report;
mod train;

pub use baselines::{ransac_triangulation_baseline, vanilla_8pt_baseline};
pub use config::{RigKind, SynthConfig, TrainConfig};
pub use eval::{
    estimate_relative_pose, evaluate_camera, evaluate_pose, evaluate_pose_with_cameras, CameraEvaluation, CameraRow,
    PairRow, PoseEvaluation, PoseRow, EIGHT_POINT_ROW, RANSAC_ROW,
};
pub use experiments::{extrinsics_ablation, frame_count_sweep, AblationResult, Extrinsics, FrameSweep, SweepPoint};
pub use report::{sha256_hex, Report, Series, Table, TableRow};
pub use train::{init_network, pose_sample_gradients, train_cam, train_cam_from, train_pose, train_pose_from, LossRecord, TrainReport};

impl TrainReport {
    pub fn loss_series(&self) -> Series {
        let mut s = Series::new("loss", &["sample", "total", "stochastic", "entropy", "estimation"]);
        for l in &self.losses {
            s.rows.push(vec![l.sample as f64, l.total, l.stochastic, l.entropy, l.estimation]);
        }
        s
    }
}
