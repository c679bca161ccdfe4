mod common;

use common::*;
use nalgebra::Vector3;
use proptest::prelude::*;

use stochtri::geometry::{project, triangulate};
use stochtri::synth::{generate_sequence, render_detections, template_lengths, Dataset, NoiseSpec, RigSpec};
use stochtri::{Camera, Error, Point2, Skeleton};

#[test]
fn gaussian_noise_has_the_configured_spread() {
    let data = dataset(RigSpec::ring(4), 150, 1, NoiseSpec::gaussian(2.0, 17));
    let mut residuals = Vec::new();
    for (det, pose) in data.detections.iter().zip(&data.poses) {
        for (j, x) in pose.iter().enumerate() {
            for (v, cam) in data.cameras.iter().enumerate() {
                let d = det.keypoints[j][v] - project_oracle(cam, x);
                residuals.extend([d.x, d.y]);
            }
        }
    }
    assert!(residuals.len() >= 10_000);
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let std = (residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((std - 2.0).abs() < 0.1, "std {std}");
}

#[test]
fn bone_lengths_match_the_template() {
    let skel = Skeleton::human17();
    let lengths = template_lengths();
    for seed in 0..3 {
        for pose in generate_sequence(200, &skel, seed).unwrap() {
            for (&(a, b), l) in skel.edges.iter().zip(&lengths) {
                assert!(((pose[a] - pose[b]).norm() - l).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn noiseless_detections_triangulate_exactly_from_any_views() {
    let data = dataset(RigSpec::dome(6).with_seed(2), 10, 5, NoiseSpec::noiseless());
    for (det, pose) in data.detections.iter().zip(&data.poses) {
        for (j, x) in pose.iter().enumerate() {
            for mask in 0u32..64 {
                let views: Vec<usize> = (0..6).filter(|v| mask & (1 << v) != 0).collect();
                if views.len() < 2 {
                    continue;
                }
                let cams: Vec<&Camera> = views.iter().map(|&v| &data.cameras[v]).collect();
                let obs: Vec<Point2> = views.iter().map(|&v| det.keypoints[j][v]).collect();
                assert!((triangulate(&cams, &obs).unwrap() - x).norm() < 1e-6);
            }
        }
    }
}

#[test]
fn presets_look_at_the_capture_center() {
    for seed in 0..10 {
        for spec in [RigSpec::ring(7), RigSpec::arc(4), RigSpec::dome(10), RigSpec::ring(3)] {
            let spec = spec.with_seed(seed);
            for cam in spec.build().unwrap() {
                let axis: Vector3<f64> = cam.rotation.row(2).transpose();
                let to_target = spec.target() - cam.center();
                assert!(angle_between(&axis, &to_target) < 1f64.to_radians());
                assert!(project(&cam, &spec.target()).is_ok());
            }
        }
    }
}

#[test]
fn occlusions_leave_two_views_per_joint() {
    let noise = NoiseSpec {
        occlusion_rate: 0.3,
        ..NoiseSpec::gaussian(1.0, 3)
    };
    let data = dataset(RigSpec::ring(4), 200, 2, noise);
    let mut hidden = 0;
    for det in &data.detections {
        for v in &det.valid {
            assert!(v.iter().filter(|&&b| b).count() >= 2);
            hidden += v.iter().filter(|&&b| !b).count();
        }
    }
    assert!(hidden > 0);
}

#[test]
fn unrenderable_joints_are_reported() {
    let skel = Skeleton::human17();
    let poses = generate_sequence(1, &skel, 0).unwrap();
    // both cameras behind the subject's back, looking away from it
    let mut rig = RigSpec::ring(2).build().unwrap();
    for c in &mut rig {
        *c = Camera::look_at(c.id, c.intrinsics, c.center(), c.center() * 2.0);
    }
    assert!(matches!(
        render_detections(&poses, &rig, &NoiseSpec::noiseless()),
        Err(Error::UnrenderableFrame { frame: 0, .. })
    ));
}

#[test]
fn json_round_trip_is_exact() {
    let data = dataset(RigSpec::arc(5).with_seed(4), 6, 3, outlier_noise(2));
    let text = data.to_json();
    let back = Dataset::from_json(&text, "mem.json".as_ref()).unwrap();
    assert_eq!(back, data);
    assert_eq!(back.to_json(), text);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    data.save(&path).unwrap();
    assert_eq!(Dataset::load(&path).unwrap(), data);
}

#[test]
fn dataset_errors_name_the_field() {
    let data = dataset(RigSpec::ring(3), 2, 3, NoiseSpec::noiseless());
    let mut doc: serde_json::Value = serde_json::from_str(&data.to_json()).unwrap();
    doc["detections"][1]["valid"][4] = serde_json::json!([true, false, false]);
    let err = Dataset::from_json(&doc.to_string(), "bad.json".as_ref()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("bad.json") && msg.contains("detections[1].valid[4]"), "{msg}");
    assert_eq!(err.exit_code(), 3);

    let mut doc: serde_json::Value = serde_json::from_str(&data.to_json()).unwrap();
    doc["cameras"][2]["K"][0] = serde_json::json!(-5.0);
    let msg = Dataset::from_json(&doc.to_string(), "bad.json".as_ref()).unwrap_err().to_string();
    assert!(msg.contains("cameras[2]"), "{msg}");

    let mut doc: serde_json::Value = serde_json::from_str(&data.to_json()).unwrap();
    doc["poses"][0].as_array_mut().unwrap().pop();
    let msg = Dataset::from_json(&doc.to_string(), "bad.json".as_ref()).unwrap_err().to_string();
    assert!(msg.contains("poses[0]"), "{msg}");

    assert!(matches!(Dataset::load("/nonexistent/d.json".as_ref()), Err(Error::Dataset { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generation_is_a_function_of_the_seeds(rig_seed: u64, motion_seed: u64, noise_seed: u64) {
        let make = |n: u64| dataset(RigSpec::ring(4).with_seed(rig_seed), 5, motion_seed, NoiseSpec { outlier_rate: 0.2, outlier_magnitude: 30.0, occlusion_rate: 0.1, ..NoiseSpec::gaussian(2.0, n) });
        let a = make(noise_seed);
        prop_assert_eq!(a.to_json(), make(noise_seed).to_json());
        prop_assert_ne!(a.detections, make(noise_seed.wrapping_add(1)).detections);
    }
}
