//! Builds a pool of pose hypotheses for one noisy frame and compares
//! direct triangulation from all views with a few selection rules.
//!
//! No network is involved: the pool is scored uniformly, so `avg` and
//! `weight` coincide and the oracle rows show what a perfect scorer could
//! reach.

use stochtri::geometry::triangulate;
use stochtri::hypotheses::{generate_pose_pool, HypothesisPool};
use stochtri::metrics::mpjpe;
use stochtri::select::{select, SelectionStrategy};
use stochtri::synth::{generate_dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::{Pose, Skeleton};

fn main() -> stochtri::Result<()> {
    let skel = Skeleton::human17();
    let noise = NoiseSpec {
        outlier_rate: 0.1,
        outlier_magnitude: 40.0,
        ..NoiseSpec::gaussian(3.0, 5)
    };
    let data = generate_dataset(
        &SynthSpec {
            rig: RigSpec::ring(5),
            frames: 1,
            motion_seed: 9,
            noise,
        },
        &skel,
    )?;
    let det = &data.detections[0];
    let truth = &data.poses[0];

    // every valid view at once
    let joints = (0..det.joint_count())
        .map(|j| {
            let views = det.valid_views(j);
            let cams: Vec<_> = views.iter().map(|&v| &data.cameras[v]).collect();
            let obs: Vec<_> = views.iter().map(|&v| det.keypoints[j][v]).collect();
            triangulate(&cams, &obs)
        })
        .collect::<stochtri::Result<Vec<_>>>()?;
    println!("all views         MPJPE {:7.2} mm", mpjpe(&joints, truth)?);

    let hyps = generate_pose_pool(det, &data.cameras, 200, 1)?;
    println!("pool of {} hypotheses; first one uses views {:?} for joint 0", hyps.len(), hyps[0].view_subsets[0]);
    let pool = HypothesisPool::new(hyps.iter().map(|h| h.pose.clone()).collect::<Vec<Pose>>());
    let errors: Vec<f64> = hyps.iter().map(|h| mpjpe(&h.pose, truth)).collect::<stochtri::Result<_>>()?;
    for s in [SelectionStrategy::Avg, SelectionStrategy::Random, SelectionStrategy::Best, SelectionStrategy::Worst] {
        let est = select(&pool, s, Some(&errors), 3)?;
        println!("{:<17} MPJPE {:7.2} mm", s.name(), mpjpe(&est, truth)?);
    }
    Ok(())
}
