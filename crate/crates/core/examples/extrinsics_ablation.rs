//! Pose accuracy when the camera extrinsics are replaced by estimates from
//! the camera model: rotation only, translation only, or both.

use stochtri::harness::{extrinsics_ablation, train_cam, train_pose, TrainConfig};
use stochtri::synth::{generate_dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::Skeleton;

fn main() -> stochtri::Result<()> {
    let skel = Skeleton::human17();
    let rig = RigSpec::ring(5);
    let noise = |seed| NoiseSpec::gaussian(2.0, seed);
    let train = generate_dataset(&SynthSpec { rig: rig.clone(), frames: 300, motion_seed: 1, noise: noise(2) }, &skel)?;
    let test = generate_dataset(&SynthSpec { rig, frames: 100, motion_seed: 3, noise: noise(4) }, &skel)?;

    let pose_cfg = TrainConfig {
        iterations: 160,
        ..TrainConfig::pose()
    };
    let cam_cfg = TrainConfig {
        iterations: 160,
        learning_rate: 1e-4,
        frames_per_sample: 100,
        min_frames_per_sample: Some(10),
        subset_fraction: Some(0.5),
        ..TrainConfig::camera()
    };
    let (pose_net, _) = train_pose(&pose_cfg, &train, &skel)?;
    let (cam_net, _) = train_cam(&cam_cfg, &train)?;

    let result = extrinsics_ablation(&pose_net, &cam_net, &test, &skel, &pose_cfg, &cam_cfg)?;
    for (view, e) in &result.estimates {
        println!(
            "camera {view}: E_R {:.4} rad, E_t {:6.1} mm, E_3D {:6.1} mm",
            e.rotation, e.translation, e.reconstruction_3d
        );
    }
    for (variant, mpjpe) in &result.mpjpe {
        println!("{:<7} MPJPE {mpjpe:8.2} mm", variant.name());
    }
    Ok(())
}
