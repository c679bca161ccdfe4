//! Trains the pose scoring network on a noisy 7-camera ring and compares
//! every selection strategy and the RANSAC baseline on held-out frames,
//! with the left/right pose-prior variance of each estimate.
//!
//! ```text
//! cargo run --release --example train_pose -- 500
//! ```

use std::time::Instant;

use stochtri::harness::{evaluate_pose, train_pose, TrainConfig};
use stochtri::select::SelectionStrategy;
use stochtri::skeleton::PAIR_NAMES;
use stochtri::synth::{generate_dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::Skeleton;

fn main() -> stochtri::Result<()> {
    let iterations = std::env::args().nth(1).map_or(200, |s| s.parse().expect("iteration count"));
    let skel = Skeleton::human17();
    let noise = |seed| NoiseSpec {
        outlier_rate: 0.1,
        outlier_magnitude: 40.0,
        ..NoiseSpec::gaussian(3.0, seed)
    };
    let rig = RigSpec::ring(7);
    let train = generate_dataset(&SynthSpec { rig: rig.clone(), frames: 400, motion_seed: 100, noise: noise(200) }, &skel)?;
    let test = generate_dataset(&SynthSpec { rig, frames: 60, motion_seed: 300, noise: noise(400) }, &skel)?;

    let cfg = TrainConfig {
        iterations,
        ..TrainConfig::pose()
    };
    let t = Instant::now();
    let (net, report) = train_pose(&cfg, &train, &skel)?;
    println!("{} samples, {} optimizer steps in {:.1?}", report.losses.len(), report.steps, t.elapsed());
    for end in [50, iterations / 2, iterations] {
        println!("  smoothed loss at {end:4}: {:.2}", report.smoothed_loss(end, 50));
    }

    let eval = evaluate_pose(&net, &test, &skel, &SelectionStrategy::ALL, &cfg, true)?;
    println!("\n{:<8} {:>10}   pose-prior S2 per pair", "", "MPJPE mm");
    println!("{:<8} {:>10}   {}", "", "", PAIR_NAMES.join(" "));
    for row in &eval.rows {
        let prior: Vec<String> = row.pose_prior.iter().map(|v| format!("{v:.1e}")).collect();
        println!("{:<8} {:>10.2}   {}", row.name, row.mpjpe, prior.join(" "));
    }
    Ok(())
}
