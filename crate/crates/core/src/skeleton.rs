use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;

/// Kinematic layout of the 17-joint body model.
///
/// Joint order: pelvis, right hip, right knee, right ankle, left hip, left
/// knee, left ankle, spine, thorax, neck, head, left shoulder, left elbow,
/// left wrist, right shoulder, right elbow, right wrist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub joint_names: Vec<String>,
    /// Body parts as (parent, child) joint pairs.
    pub edges: Vec<(usize, usize)>,
    /// Left/right body-part pairs as (left edge, right edge) indices into `edges`.
    pub symmetric_pairs: Vec<(usize, usize)>,
    pub left_shoulder: usize,
    pub right_shoulder: usize,
    pub left_hip: usize,
    pub right_hip: usize,
}

pub const JOINT_COUNT: usize = 17;

/// Names of the six left/right pairs in `symmetric_pairs` order.
pub const PAIR_NAMES: [&str; 6] = [
    "upper arms",
    "lower arms",
    "shoulders",
    "hips",
    "upper legs",
    "lower legs",
];

impl Default for Skeleton {
    fn default() -> Self {
        Self::human17()
    }
}

impl Skeleton {
    pub fn human17() -> Self {
        let joint_names = [
            "pelvis", "r_hip", "r_knee", "r_ankle", "l_hip", "l_knee", "l_ankle", "spine", "thorax",
            "neck", "head", "l_shoulder", "l_elbow", "l_wrist", "r_shoulder", "r_elbow", "r_wrist",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let edges = vec![
            (0, 1),   // 0 right hip
            (1, 2),   // 1 right upper leg
            (2, 3),   // 2 right lower leg
            (0, 4),   // 3 left hip
            (4, 5),   // 4 left upper leg
            (5, 6),   // 5 left lower leg
            (0, 7),   // 6 lower spine
            (7, 8),   // 7 upper spine
            (8, 9),   // 8 neck
            (9, 10),  // 9 head
            (8, 11),  // 10 left shoulder
            (11, 12), // 11 left upper arm
            (12, 13), // 12 left lower arm
            (8, 14),  // 13 right shoulder
            (14, 15), // 14 right upper arm
            (15, 16), // 15 right lower arm
        ];
        let symmetric_pairs = vec![(11, 14), (12, 15), (10, 13), (3, 0), (4, 1), (5, 2)];
        Self {
            joint_names,
            edges,
            symmetric_pairs,
            left_shoulder: 11,
            right_shoulder: 14,
            left_hip: 4,
            right_hip: 1,
        }
    }

    pub fn joint_count(&self) -> usize {
        self.joint_names.len()
    }

    /// Euclidean length of every body part, in `edges` order.
    pub fn part_lengths(&self, pose: &[Point3]) -> Vec<f64> {
        self.edges.iter().map(|&(a, b)| (pose[a] - pose[b]).norm()).collect()
    }
}

/// A 3D pose: one point per joint, millimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pose(pub Vec<Point3>);

impl Pose {
    pub fn new(joints: Vec<Point3>) -> Self {
        Self(joints)
    }

    pub fn translated(&self, offset: &Point3) -> Self {
        Self(self.0.iter().map(|p| p + offset).collect())
    }
}

impl AsRef<[Point3]> for Pose {
    fn as_ref(&self) -> &[Point3] {
        &self.0
    }
}

impl Deref for Pose {
    type Target = [Point3];
    fn deref(&self) -> &[Point3] {
        &self.0
    }
}

impl DerefMut for Pose {
    fn deref_mut(&mut self) -> &mut [Point3] {
        &mut self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_consistent() {
        let s = Skeleton::human17();
        assert_eq!(s.joint_count(), JOINT_COUNT);
        assert_eq!(s.edges.len(), 16);
        assert_eq!(s.symmetric_pairs.len(), 6);
        for &(l, r) in &s.symmetric_pairs {
            let (ln, rn) = (&s.joint_names[s.edges[l].1], &s.joint_names[s.edges[r].1]);
            assert!(ln.starts_with("l_") && rn.starts_with("r_"), "{ln} / {rn}");
        }
    }
}
