//! Simulated garment sorting cell: a 2.5D world model with overhead RGB-D
//! cameras, grasp prediction, background-subtraction segmentation, a
//! vision-language classifier client, the cell state machine and an offline
//! classifier benchmark.

pub mod bench;
pub mod cellsim;
pub mod classify;
pub mod grasp;
pub mod orchestrator;
pub mod segmentation;

pub use cellsim::{BoundingBox, CameraId, CameraModel, CellError, GarmentClass, RgbdFrame, WorldState, ZoneId};
pub use classify::{
    BackendDescriptor, ClassifierBackend, ClassifyError, ParseOptions, ParsedLabel, ResponseLog, ResponseRecord,
};
pub use grasp::{GraspCandidate, GraspError, GraspParams};
pub use orchestrator::{CellState, OrchestratorError, RunConfig, RunLog};
pub use segmentation::{ColoredPointCloud, SegThresholds, SegmentationError};
