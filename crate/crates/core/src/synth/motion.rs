use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::skeleton::{Pose, Skeleton};

/// Rest direction (body frame: +x subject's right, +y forward, +z up),
/// length in mm and joint-angle limit in radians, per body part.
const BONES: [([f64; 3], f64, f64); 16] = [
    ([1.0, 0.0, 0.0], 135.0, 0.10),   // right hip
    ([0.0, 0.0, -1.0], 445.0, 0.55),  // right upper leg
    ([0.0, 0.0, -1.0], 440.0, 0.45),  // right lower leg
    ([-1.0, 0.0, 0.0], 135.0, 0.10),  // left hip
    ([0.0, 0.0, -1.0], 445.0, 0.55),  // left upper leg
    ([0.0, 0.0, -1.0], 440.0, 0.45),  // left lower leg
    ([0.0, 0.0, 1.0], 235.0, 0.20),   // lower spine
    ([0.0, 0.0, 1.0], 250.0, 0.15),   // upper spine
    ([0.0, 0.15, 1.0], 115.0, 0.25),  // neck
    ([0.0, 0.2, 1.0], 115.0, 0.30),   // head
    ([-1.0, 0.0, -0.1], 150.0, 0.10), // left shoulder
    ([-0.15, 0.0, -1.0], 280.0, 0.90),// left upper arm
    ([0.0, 0.3, -1.0], 250.0, 0.80),  // left lower arm
    ([1.0, 0.0, -0.1], 150.0, 0.10),  // right shoulder
    ([0.15, 0.0, -1.0], 280.0, 0.90), // right upper arm
    ([0.0, 0.3, -1.0], 250.0, 0.80),  // right lower arm
];

const PELVIS_HEIGHT: f64 = 950.0;
/// AR(1) coefficient of the joint-angle process.
const ANGLE_DECAY: f64 = 0.95;
/// Horizontal drift bound of the pelvis around the capture center (mm).
const DRIFT_LIMIT: f64 = 400.0;

/// Body-part lengths of the synthetic subject, in edge order.
pub fn template_lengths() -> Vec<f64> {
    BONES.iter().map(|b| b.1).collect()
}

/// Rest pose with the pelvis at the origin.
pub fn template_pose(skel: &Skeleton) -> Vec<Point3> {
    let angles = vec![Vector3::zeros(); BONES.len()];
    forward_kinematics(skel, &angles, &Rotation3::identity(), &Point3::zeros())
}

fn forward_kinematics(
    skel: &Skeleton,
    angles: &[Vector3<f64>],
    root: &Rotation3<f64>,
    root_pos: &Point3,
) -> Vec<Point3> {
    let j = skel.joint_count();
    let mut pos = vec![Point3::zeros(); j];
    let mut frame = vec![*root; j];
    pos[0] = *root_pos;
    for (e, &(parent, child)) in skel.edges.iter().enumerate() {
        let (dir, len, _) = BONES[e];
        let local = Rotation3::new(angles[e]);
        let r = frame[parent] * local;
        frame[child] = r;
        pos[child] = pos[parent] + r * Vector3::from(dir).normalize() * len;
    }
    pos
}

/// Smooth random motion with rigid body parts.
///
/// Every joint angle follows a clamped AR(1) walk; the root turns slowly and
/// drifts on the ground plane around the origin.
pub fn generate_sequence(frames: usize, skel: &Skeleton, motion_seed: u64) -> Result<Vec<Pose>> {
    if skel.edges.len() != BONES.len() {
        return Err(Error::ShapeMismatch(format!(
            "motion model expects {} body parts, skeleton has {}",
            BONES.len(),
            skel.edges.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(motion_seed);
    let innovation = (1.0 - ANGLE_DECAY * ANGLE_DECAY).sqrt();
    let mut angles: Vec<Vector3<f64>> = BONES
        .iter()
        .map(|b| {
            let lim = b.2;
            Vector3::from_fn(|_, _| (0.5 * lim * rng.sample::<f64, _>(StandardNormal)).clamp(-lim, lim))
        })
        .collect();
    let mut yaw: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let mut drift = Vector3::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0), 0.0);
    let mut out = Vec::with_capacity(frames);
    for _ in 0..frames {
        let root = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
        let root_pos = Point3::new(drift.x, drift.y, PELVIS_HEIGHT + drift.z);
        out.push(Pose::new(forward_kinematics(skel, &angles, &root, &root_pos)));

        for (a, b) in angles.iter_mut().zip(BONES.iter()) {
            let lim = b.2;
            for k in 0..3 {
                let eps: f64 = rng.sample(StandardNormal);
                a[k] = (ANGLE_DECAY * a[k] + 0.5 * lim * innovation * eps).clamp(-lim, lim);
            }
        }
        yaw += 0.05 * rng.sample::<f64, _>(StandardNormal);
        for k in 0..2 {
            let eps: f64 = rng.sample(StandardNormal);
            drift[k] = (0.98 * drift[k] + 25.0 * eps).clamp(-DRIFT_LIMIT, DRIFT_LIMIT);
        }
        drift.z = (0.9 * drift.z + 5.0 * rng.sample::<f64, _>(StandardNormal)).clamp(-60.0, 60.0);
    }
    Ok(out)
}
