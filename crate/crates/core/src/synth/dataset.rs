use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{generate_sequence, render_detections, NoiseSpec, RigSpec};
use crate::error::{Error, Result};
use crate::geometry::{Camera, Point2, Point3};
use crate::hypotheses::DetectionSet;
use crate::skeleton::{Pose, Skeleton};

pub const FORMAT_NAME: &str = "stochtri-dataset";
pub const FORMAT_VERSION: u32 = 1;

/// One sequence: cameras, ground-truth poses and per-frame detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub cameras: Vec<Camera>,
    pub poses: Vec<Pose>,
    pub detections: Vec<DetectionSet>,
    pub rig: Option<RigSpec>,
    pub noise: Option<NoiseSpec>,
    pub motion_seed: Option<u64>,
}

/// Everything needed to regenerate a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub rig: RigSpec,
    pub frames: usize,
    pub motion_seed: u64,
    pub noise: NoiseSpec,
}

pub fn generate_dataset(spec: &SynthSpec, skel: &Skeleton) -> Result<Dataset> {
    let cameras = spec.rig.build()?;
    let poses = generate_sequence(spec.frames, skel, spec.motion_seed)?;
    let detections = render_detections(&poses, &cameras, &spec.noise)?;
    Ok(Dataset {
        cameras,
        poses,
        detections,
        rig: Some(spec.rig.clone()),
        noise: Some(spec.noise),
        motion_seed: Some(spec.motion_seed),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    format: String,
    version: u32,
    cameras: Vec<CameraRecord>,
    #[serde(default)]
    poses: Vec<Vec<[f64; 3]>>,
    detections: Vec<DetectionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rig: Option<RigSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    motion_seed: Option<u64>,
}

/// Camera entry; `K` and `R` are row-major.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraRecord {
    id: usize,
    #[serde(rename = "K")]
    k: [f64; 9],
    #[serde(rename = "R")]
    r: [f64; 9],
    t: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    frame_id: usize,
    /// `keypoints[joint][view] = [u, v]`
    keypoints: Vec<Vec<[f64; 2]>>,
    valid: Vec<Vec<bool>>,
}

fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[3 * r + c] = m[(r, c)];
        }
    }
    out
}

impl Dataset {
    pub fn joint_count(&self) -> usize {
        self.detections.first().map(|d| d.joint_count()).unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let file = DatasetFile {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            cameras: self
                .cameras
                .iter()
                .map(|c| CameraRecord {
                    id: c.id,
                    k: row_major(&c.intrinsics),
                    r: row_major(&c.rotation),
                    t: [c.translation.x, c.translation.y, c.translation.z],
                })
                .collect(),
            poses: self.poses.iter().map(|p| p.iter().map(|x| [x.x, x.y, x.z]).collect()).collect(),
            detections: self
                .detections
                .iter()
                .map(|d| DetectionRecord {
                    frame_id: d.frame_id,
                    keypoints: d.keypoints.iter().map(|row| row.iter().map(|p| [p.x, p.y]).collect()).collect(),
                    valid: d.valid.clone(),
                })
                .collect(),
            rig: self.rig.clone(),
            noise: self.noise,
            motion_seed: self.motion_seed,
        };
        serde_json::to_string(&file).expect("dataset serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::dataset(path, e.to_string()))?;
        Self::from_json(&text, path)
    }

    /// Parses and validates a dataset document. `origin` is only used for
    /// error context.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let err = |msg: String| Error::dataset(origin, msg);
        let file: DatasetFile = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
        if file.format != FORMAT_NAME {
            return Err(err(format!("format: expected `{FORMAT_NAME}`, got `{}`", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(err(format!("version: unsupported version {}", file.version)));
        }
        if file.cameras.len() < 2 {
            return Err(err("cameras: need at least 2 cameras".into()));
        }
        let cameras: Vec<Camera> = file
            .cameras
            .iter()
            .map(|c| {
                Camera::new(
                    c.id,
                    Matrix3::from_row_slice(&c.k),
                    Matrix3::from_row_slice(&c.r),
                    Vector3::from(c.t),
                )
            })
            .collect();
        for (i, c) in cameras.iter().enumerate() {
            c.validate().map_err(|e| err(format!("cameras[{i}]: {e}")))?;
        }
        let k = cameras.len();
        let mut detections = Vec::with_capacity(file.detections.len());
        let mut joints = None;
        for (f, d) in file.detections.into_iter().enumerate() {
            let j = d.keypoints.len();
            if *joints.get_or_insert(j) != j {
                return Err(err(format!("detections[{f}].keypoints: {j} joints, expected {}", joints.unwrap())));
            }
            if d.valid.len() != j {
                return Err(err(format!("detections[{f}].valid: {} rows, expected {j}", d.valid.len())));
            }
            for (jj, (kp, v)) in d.keypoints.iter().zip(&d.valid).enumerate() {
                if kp.len() != k || v.len() != k {
                    return Err(err(format!("detections[{f}].keypoints[{jj}]: expected {k} views")));
                }
                if v.iter().filter(|&&b| b).count() < 2 {
                    return Err(err(format!("detections[{f}].valid[{jj}]: fewer than 2 valid views")));
                }
                if kp.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(err(format!("detections[{f}].keypoints[{jj}]: non-finite coordinate")));
                }
            }
            detections.push(DetectionSet {
                frame_id: d.frame_id,
                keypoints: d
                    .keypoints
                    .into_iter()
                    .map(|row| row.into_iter().map(|p| Point2::new(p[0], p[1])).collect())
                    .collect(),
                valid: d.valid,
            });
        }
        if !file.poses.is_empty() && file.poses.len() != detections.len() {
            return Err(err(format!(
                "poses: {} frames but {} detection frames",
                file.poses.len(),
                detections.len()
            )));
        }
        let mut poses = Vec::with_capacity(file.poses.len());
        for (f, p) in file.poses.into_iter().enumerate() {
            if Some(p.len()) != joints {
                return Err(err(format!("poses[{f}]: {} joints, expected {}", p.len(), joints.unwrap_or(0))));
            }
            poses.push(Pose::new(p.into_iter().map(Point3::from).collect()));
        }
        Ok(Self {
            cameras,
            poses,
            detections,
            rig: file.rig,
            noise: file.noise,
            motion_seed: file.motion_seed,
        })
    }

    /// Errors unless every frame carries ground truth.
    pub fn require_ground_truth(&self, origin: &Path) -> Result<()> {
        if self.poses.len() != self.detections.len() || self.poses.is_empty() {
            return Err(Error::dataset(origin, "poses: ground-truth poses are required"));
        }
        Ok(())
    }
}
