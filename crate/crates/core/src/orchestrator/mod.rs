//! The inspection state machine and the runner that drives it over the
//! simulated cell: baselines, pick and verification, shake and spread,
//! classification, sorting into bins, twin snapshots and a JSON-lines run log.
//!
//! [`step`] is pure. The [`Runner`] executes the actions a transition asks
//! for and turns their results into the next event. Service calls go through
//! a [`ServiceBus`] with per-call deadlines.

mod fsm;
mod runner;
mod service;
mod twin;

pub use fsm::{route, step, Action, Budgets, CellState, Event, FsmContext, ProtocolViolation, Transition};
pub use runner::{
    run_until_empty, run_until_empty_to, CycleReport, LogRecord, RunConfig, RunFailure, RunLog, RunOutput,
    Runner,
};
pub use service::{
    ClassifyService, ClockMode, GraspRequest, GraspService, HandlerFailure, ServiceBus, ServiceEnvelope,
    ServiceError, ServiceHandler, ServiceOutcome, ServiceRequest, ServiceResponse, Timed, CLASSIFY_SERVICE,
    GRASP_SERVICE,
};
pub use twin::{
    export_twin_snapshot, write_twin_snapshot, CloudRef, TwinBin, TwinRobot, TwinSnapshot, TwinZone,
    TWIN_SNAPSHOT_SCHEMA,
};

use crate::cellsim::CellError;
use crate::classify::ClassifyError;
use crate::grasp::GraspError;
use crate::segmentation::SegmentationError;

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error(transparent)]
    Protocol(#[from] ProtocolViolation),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Grasp(#[from] GraspError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("action needs a baseline or pick result that was never recorded")]
    MissingBaseline,
    #[error("no item is being handled")]
    NoItemInHand,
    #[error("run exceeded {0} transitions")]
    TransitionLimit(u64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
