//! Trains on one camera arrangement and evaluates on others, next to
//! models trained on those arrangements directly.

use stochtri::harness::{evaluate_pose, train_pose, TrainConfig};
use stochtri::select::SelectionStrategy;
use stochtri::synth::{generate_dataset, Dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::Skeleton;

fn split(rig: RigSpec, skel: &Skeleton) -> stochtri::Result<(Dataset, Dataset)> {
    let noise = |seed| NoiseSpec {
        outlier_rate: 0.1,
        outlier_magnitude: 40.0,
        ..NoiseSpec::gaussian(3.0, seed)
    };
    Ok((
        generate_dataset(&SynthSpec { rig: rig.clone(), frames: 300, motion_seed: 10, noise: noise(11) }, skel)?,
        generate_dataset(&SynthSpec { rig, frames: 40, motion_seed: 12, noise: noise(13) }, skel)?,
    ))
}

fn main() -> stochtri::Result<()> {
    let skel = Skeleton::human17();
    let cfg = TrainConfig {
        iterations: 200,
        ..TrainConfig::pose()
    };
    let (source_train, _) = split(RigSpec::ring(7), &skel)?;
    let (source_net, _) = train_pose(&cfg, &source_train, &skel)?;

    let weight = [SelectionStrategy::Weight];
    for (name, rig) in [("ring-7", RigSpec::ring(7)), ("arc-4", RigSpec::arc(4)), ("dome-10", RigSpec::dome(10))] {
        let (train, test) = split(rig, &skel)?;
        let (own_net, _) = train_pose(&cfg, &train, &skel)?;
        let transfer = evaluate_pose(&source_net, &test, &skel, &weight, &cfg, false)?.rows[0].mpjpe;
        let own = evaluate_pose(&own_net, &test, &skel, &weight, &cfg, false)?.rows[0].mpjpe;
        println!(
            "{name:<8} trained on ring-7: {transfer:6.2} mm   trained on {name}: {own:6.2} mm   difference {:4.1}%",
            100.0 * (transfer - own).abs() / own
        );
    }
    Ok(())
}
