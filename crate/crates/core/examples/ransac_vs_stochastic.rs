//! RANSAC triangulation against the untrained and trained pose scorer as
//! the outlier rate grows.

use stochtri::harness::{evaluate_pose, train_pose, TrainConfig, RANSAC_ROW};
use stochtri::select::SelectionStrategy;
use stochtri::synth::{generate_dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::Skeleton;

fn main() -> stochtri::Result<()> {
    let skel = Skeleton::human17();
    let noise = |rate, seed| NoiseSpec {
        outlier_rate: rate,
        outlier_magnitude: 60.0,
        ..NoiseSpec::gaussian(2.0, seed)
    };
    let rig = RigSpec::ring(6);
    let train = generate_dataset(&SynthSpec { rig: rig.clone(), frames: 200, motion_seed: 1, noise: noise(0.1, 2) }, &skel)?;
    let cfg = TrainConfig {
        iterations: 160,
        ..TrainConfig::pose()
    };
    let (net, _) = train_pose(&cfg, &train, &skel)?;

    println!("outlier rate   weight (mm)   random (mm)   RANSAC (mm)");
    for rate in [0.0, 0.05, 0.1, 0.2] {
        let test = generate_dataset(&SynthSpec { rig: rig.clone(), frames: 30, motion_seed: 7, noise: noise(rate, 8) }, &skel)?;
        let strategies = [SelectionStrategy::Weight, SelectionStrategy::Random];
        let eval = evaluate_pose(&net, &test, &skel, &strategies, &cfg, true)?;
        let m = |name| eval.mpjpe(name).unwrap_or(f64::NAN);
        println!("{rate:12.2}   {:11.2}   {:11.2}   {:11.2}", m("weight"), m("random"), m(RANSAC_ROW));
    }
    Ok(())
}
