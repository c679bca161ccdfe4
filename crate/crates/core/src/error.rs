use std::path::PathBuf;

use thiserror::Error;

use crate::scorer::Task;

/// Every failure the library can surface.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point lies behind the camera (depth {depth:e} mm)")]
    PointBehindCamera { depth: f64 },
    #[error("triangulation is degenerate (singular value ratio {ratio:e})")]
    DegenerateGeometry { ratio: f64 },
    #[error("need at least 2 views to triangulate, got {0}")]
    InsufficientViews(usize),
    #[error("need at least 8 correspondences, got {0}")]
    NotEnoughCorrespondences(usize),
    #[error("degenerate correspondence configuration (8th singular value {sigma8:e})")]
    DegenerateConfiguration { sigma8: f64 },
    #[error("no pose candidate places a strict majority of probe points in front of both cameras")]
    CheiralityAmbiguous,
    #[error("weighted quaternion sum has (near) zero norm")]
    ZeroNorm,
    #[error("joint {joint} has fewer than 2 valid views")]
    NoValidPair { joint: usize },
    #[error("resample budget exhausted after {attempts} degenerate subsets")]
    TooManyDegenerate { attempts: usize },
    #[error("feature width {got} does not match network input width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("backward pass requested without a cached forward pass")]
    NoCachedForward,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("oracle selection strategy `{0}` needs per-hypothesis errors")]
    MissingErrors(&'static str),
    #[error("empty hypothesis pool")]
    EmptyPool,
    #[error("shoulders and pelvis are collinear")]
    DegenerateTorso,
    #[error("right-side part of pair {pair} has zero length")]
    ZeroLimb { pair: usize },
    #[error("frame {frame}: joint {joint} is visible in fewer than 2 cameras")]
    UnrenderableFrame { frame: usize, joint: usize },
    #[error("task mismatch: expected {expected}, got {got}")]
    TaskMismatch { expected: Task, got: Task },
    #[error("config error: {0}")]
    Config(String),
    #[error("dataset error in {path}: {msg}")]
    Dataset { path: PathBuf, msg: String },
    #[error("weights file error: {0}")]
    Weights(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::TaskMismatch { .. } => 2,
            Error::Dataset { .. } | Error::Weights(_) | Error::Io(_) => 3,
            _ => 4,
        }
    }

    pub(crate) fn dataset(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Dataset {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
