//! Offline evaluation of classifier backends against a labeled image set:
//! confusion matrices, accuracy tables, latency statistics, weighted
//! ensembles and report files.

mod audit;
mod ensemble;
mod evaluate;
mod manifest;
mod metrics;
pub mod published;
mod report;

pub use audit::{class_count_audit, consistency_audit, AccuracyRow, AuditFlag, ClassCountAudit};
pub use ensemble::{ensemble_vote, EnsembleSpec};
pub use evaluate::{evaluate, load_image_file, no_image, EvalFailure, EvalOptions, Evaluation, ImageLoader};
pub use manifest::{class_counts, load_manifest, parse_manifest, DatasetRecord};
pub use metrics::{percentile, split_by_model, timing_stats, ConfusionMatrix, TimingStats};
pub use report::{emit_report, sanitize_model_name, ModelReport, ReportFormat};

use crate::classify::ClassifyError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
    #[error("manifest line {line}: duplicate id '{id}'")]
    DuplicateId { line: usize, id: String },
    #[error("manifest line {line}: unknown label '{label}'")]
    UnknownLabel { line: usize, label: String },
    #[error("log does not match the dataset: {0}")]
    Coverage(String),
    #[error("no response log for ensemble member '{0}'")]
    MissingMember(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid evaluation settings: {0}")]
    InvalidOptions(String),
    #[error("image for '{id}': {msg}")]
    Image { id: String, msg: String },
    #[error("latency sample is empty")]
    EmptySample,
    #[error("latency {0} is not a finite non-negative number")]
    BadLatency(f64),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
