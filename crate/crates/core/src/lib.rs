//! Non-neural pipeline of a region-based parallel-jaw grasp detector:
//! grasp sampling and scoring, point confidence labels, grasp regions,
//! anchor-based target codecs, losses and valid-grasp-ratio metrics.

pub mod anchor;
pub mod confidence;
pub mod config;
pub mod dataset;
pub mod error;
pub mod geom;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod normals;
pub mod quality;
pub mod refine;
pub mod region;
pub mod rng;
pub mod sampler;
pub mod spatial;
pub mod synth;

pub use anchor::{AnchorSet, GrnResiduals, GrnTarget};
pub use confidence::ConfidenceField;
pub use config::Config;
pub use error::{Error, Result};
pub use geom::{FrameTag, Grasp, GraspFrame, GraspScores, GripperModel, PointCloud, Vec3, WORLD_UP};
pub use metrics::EvalReport;
pub use quality::Scorer;
pub use refine::{RnResiduals, RnTarget};
pub use region::GraspRegion;
