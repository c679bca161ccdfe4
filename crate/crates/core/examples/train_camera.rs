//! Trains the camera scoring network on a 4-camera ring and sweeps the
//! number of frames used for relative pose estimation, comparing the
//! 3D reconstruction error against a single eight-point solve.
//!
//! ```text
//! cargo run --release --example train_camera -- 500
//! ```

use std::time::Instant;

use stochtri::harness::{frame_count_sweep, train_cam, TrainConfig};
use stochtri::synth::{generate_dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::Skeleton;

fn main() -> stochtri::Result<()> {
    let iterations = std::env::args().nth(1).map_or(300, |s| s.parse().expect("iteration count"));
    let skel = Skeleton::human17();
    let rig = RigSpec::ring(4).with_seed(1);
    let train = generate_dataset(&SynthSpec { rig: rig.clone(), frames: 600, motion_seed: 11, noise: NoiseSpec::gaussian(2.0, 12) }, &skel)?;
    let test = generate_dataset(&SynthSpec { rig, frames: 300, motion_seed: 13, noise: NoiseSpec::gaussian(2.0, 14) }, &skel)?;

    // windows of 10 to 100 frames, each hypothesis solving on half of them
    let cfg = TrainConfig {
        iterations,
        learning_rate: 1e-4,
        min_frames_per_sample: Some(10),
        frames_per_sample: 100,
        subset_fraction: Some(0.5),
        ..TrainConfig::camera()
    };
    let t = Instant::now();
    let (net, report) = train_cam(&cfg, &train)?;
    println!("{} samples, {} optimizer steps in {:.1?}", report.losses.len(), report.steps, t.elapsed());

    let frames: Vec<usize> = (1..=10).map(|i| 10 * i).collect();
    let sweep = frame_count_sweep(&net, &test, &cfg, &frames, 10)?;
    println!("\nframes   stochastic E_3D (mm)   eight-point E_3D (mm)");
    for p in &sweep.points {
        println!(
            "{:6}   {:8.1} ± {:6.1}      {:8.1} ± {:6.1}",
            p.frames,
            p.stochastic_mean(),
            p.stochastic_std(),
            p.baseline_mean(),
            p.baseline_std()
        );
    }
    Ok(())
}
