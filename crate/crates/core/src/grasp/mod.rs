//! Grasp candidates, reachability, picking and tactile grasp verification.

mod pick;
mod predict;
mod reach;
mod retry;
mod tactile;

pub use crate::cellsim::{pixel_to_world, world_to_pixel};
pub use pick::{execute_pick, shake_and_spread, PickOutcome};
pub use predict::{predict_grasp, quick_occupancy_check, GraspCandidate, GraspParams, GraspPose};
pub use reach::{check_reachability, segment_hits_box, RobotId, RobotModel};
pub use retry::{request_candidate_with_retry, RetryOutcome, DEFAULT_CANDIDATE_ATTEMPTS};
pub use tactile::{verify_grasp, TactileBaseline, TactileConfig, TactileReading};

use crate::cellsim::CellError;

#[derive(Debug, thiserror::Error)]
pub enum GraspError {
    #[error("tactile reading has {reading} channels, baseline has {baseline}")]
    ChannelMismatch { reading: usize, baseline: usize },
    #[error("no item in the gripper")]
    NothingGrasped,
    #[error(transparent)]
    Cell(#[from] CellError),
}
