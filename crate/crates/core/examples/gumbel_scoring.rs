//! One forward and backward pass through the scoring pipeline by hand:
//! features of a pose pool go through the network, the logits through a
//! Gumbel-Softmax, and the gradient of the expected hypothesis error flows
//! back to the network parameters.

use stochtri::features::pose_feature_width;
use stochtri::harness::pipeline::PoseSample;
use stochtri::scorer::{gumbel_softmax, GumbelConfig, Optimizer, ScoringNetwork, Task};
use stochtri::select::{stochastic_loss, SelectionStrategy};
use stochtri::synth::{generate_dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::{Camera, Skeleton};

fn main() -> stochtri::Result<()> {
    let skel = Skeleton::human17();
    let data = generate_dataset(
        &SynthSpec {
            rig: RigSpec::ring(4),
            frames: 1,
            motion_seed: 1,
            noise: NoiseSpec::gaussian(5.0, 2),
        },
        &skel,
    )?;
    let projections: Vec<_> = data.cameras.iter().map(Camera::projection).collect();
    let sample = PoseSample::new(&data.detections[0], &projections, &skel, 50, 3)?;
    let errors = sample.errors(&data.poses[0])?;

    let mut net = ScoringNetwork::new(Task::Pose, pose_feature_width(&skel), &[64, 32], 1e-3, 0);
    println!("network: {} inputs, hidden {:?}, {} parameters", net.input_width(), net.hidden_widths(), net.parameter_count());

    let cfg = GumbelConfig::new(1.5, true)?;
    for step in 0..5 {
        let logits = net.forward_pool(&sample.features)?;
        let g = gumbel_softmax(&logits, &cfg, step);
        let loss = stochastic_loss(&errors, &g.probs)?;
        // d(sum p_i e_i)/dp = e
        let dlogits = g.backward(&errors)?;
        let grads = net.backward(&dlogits)?;
        net.step(&grads, 1e-3, Optimizer::Adam)?;

        let clean = gumbel_softmax(&logits, &cfg.inference(), 0);
        let top = clean.probs.iter().cloned().fold(0.0, f64::max);
        println!("step {step}: expected error {loss:6.2} mm, largest noise-free probability {top:.3}");
    }
    let pool = sample.scored(&net, cfg.temperature)?;
    let weighted = stochtri::select::select(&pool, SelectionStrategy::Weight, None, 0)?;
    println!("weighted estimate MPJPE {:.2} mm", stochtri::metrics::mpjpe(&weighted, &data.poses[0])?);
    Ok(())
}
