use serde::{Deserialize, Serialize};

use crate::cellsim::GarmentClass;

use super::published::{PublishedAccuracy, CLASS_COUNTS, IMAGE_COUNT};
use super::{class_counts, ConfusionMatrix, DatasetRecord};

/// One accuracy-table row as fractions in [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub model: String,
    pub overall: f64,
    pub per_class: [Option<f64>; 6],
}

impl AccuracyRow {
    pub fn from_matrix(model: &str, m: &ConfusionMatrix) -> Self {
        Self {
            model: model.to_string(),
            overall: m.overall_accuracy().unwrap_or(0.0),
            per_class: m.per_class_accuracy(),
        }
    }

    pub fn from_published(p: &PublishedAccuracy) -> Self {
        Self {
            model: p.model.to_string(),
            overall: p.overall_pct / 100.0,
            per_class: p.per_class_pct.map(|v| Some(v / 100.0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFlag {
    pub model: String,
    /// Sum over classes of round(accuracy * class count).
    pub back_computed_correct: u64,
    /// round(overall * total).
    pub reported_correct: u64,
}

impl AuditFlag {
    pub fn difference(&self) -> i64 {
        self.back_computed_correct as i64 - self.reported_correct as i64
    }
}

/// Flags rows whose per-class accuracies imply a different number of
/// correct answers than the overall accuracy does.
pub fn consistency_audit(rows: &[AccuracyRow], counts: &[u64; 6], total: u64) -> Vec<AuditFlag> {
    rows.iter()
        .filter_map(|row| {
            let back: u64 = GarmentClass::ALL
                .iter()
                .map(|c| {
                    let i = c.index();
                    row.per_class[i].map_or(0, |a| (a * counts[i] as f64).round() as u64)
                })
                .sum();
            let reported = (row.overall * total as f64).round() as u64;
            (back != reported).then(|| AuditFlag {
                model: row.model.clone(),
                back_computed_correct: back,
                reported_correct: reported,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCountAudit {
    pub counts: [u64; 6],
    pub total: u64,
    pub published_counts: [u64; 6],
    pub published_counts_sum: u64,
    pub published_image_count: u64,
    pub matches_published_counts: bool,
    pub matches_published_image_count: bool,
}

/// Compares a dataset's class histogram with the published one.
pub fn class_count_audit(dataset: &[DatasetRecord]) -> ClassCountAudit {
    let counts = class_counts(dataset);
    let total = counts.iter().sum();
    ClassCountAudit {
        counts,
        total,
        published_counts: CLASS_COUNTS,
        published_counts_sum: CLASS_COUNTS.iter().sum(),
        published_image_count: IMAGE_COUNT,
        matches_published_counts: counts == CLASS_COUNTS,
        matches_published_image_count: total == IMAGE_COUNT,
    }
}
