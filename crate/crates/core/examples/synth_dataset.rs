//! Generates a synthetic capture, writes it to JSON and reads it back.
//!
//! ```text
//! cargo run --example synth_dataset -- /tmp/ring7.json
//! ```

use stochtri::synth::{generate_dataset, Dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::Skeleton;

fn main() -> stochtri::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "ring7.json".into());
    let skel = Skeleton::human17();
    let spec = SynthSpec {
        rig: RigSpec::ring(7).with_seed(3),
        frames: 120,
        motion_seed: 42,
        noise: NoiseSpec {
            pixel_sigma: 3.0,
            outlier_rate: 0.1,
            outlier_magnitude: 40.0,
            occlusion_rate: 0.05,
            seed: 7,
        },
    };
    let data = generate_dataset(&spec, &skel)?;
    println!("{} cameras, {} frames, {} joints", data.cameras.len(), data.poses.len(), data.joint_count());
    for cam in &data.cameras {
        let c = cam.center();
        println!("  camera {}: center ({:7.0}, {:7.0}, {:5.0}) mm", cam.id, c.x, c.y, c.z);
    }

    let lengths = skel.part_lengths(&data.poses[0].0);
    let drift = data
        .poses
        .iter()
        .flat_map(|p| skel.part_lengths(&p.0).into_iter().zip(lengths.clone()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    println!("largest bone-length change over the sequence: {drift:.2e} mm");

    let hidden: usize = data.detections.iter().map(|d| d.valid.iter().flatten().filter(|v| !**v).count()).sum();
    println!("occluded detections: {hidden}");

    data.save(path.as_ref())?;
    let back = Dataset::load(path.as_ref())?;
    assert_eq!(back, data);
    println!("wrote and re-read {path}");
    Ok(())
}
