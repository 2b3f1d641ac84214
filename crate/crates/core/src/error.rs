use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the grasp pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("invalid grasp: {0}")]
    InvalidGrasp(String),
    #[error("invalid gripper: {0}")]
    InvalidGripper(String),
    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("normals required")]
    NormalsRequired,
    #[error("object not graspable at this gripper scale")]
    NotGraspable,
    #[error("no positive points")]
    NoPositivePoints,
    #[error("no equiangular construction for {0} anchors")]
    NoEquiangularConstruction(usize),
    #[error("degenerate orientation")]
    DegenerateOrientation,
    #[error("no target for negatives")]
    NegativeProposal,
    #[error("no grasps to evaluate")]
    NoGrasps,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("config: missing value for key `{0}`")]
    MissingKey(String),
    #[error("config: unknown key `{0}`")]
    UnknownKey(String),
    #[error("config: `{key}` = {value} out of range, expected {range}")]
    OutOfRange { key: String, value: String, range: String },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
