use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cellsim::GarmentClass;

use super::BenchError;

/// One labeled inspection image. A scene without an object is labeled `empty`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub image: PathBuf,
    pub label: GarmentClass,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestLine {
    id: String,
    image: PathBuf,
    label: String,
}

/// Reads a JSON-lines manifest. Relative image paths are resolved against
/// the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<DatasetRecord>, BenchError> {
    let text = fs::read_to_string(path)?;
    let mut records = parse_manifest(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for r in &mut records {
        if r.image.is_relative() {
            r.image = base.join(&r.image);
        }
    }
    Ok(records)
}

/// Parses manifest text; blank lines are skipped, line numbers are 1-based.
pub fn parse_manifest(text: &str) -> Result<Vec<DatasetRecord>, BenchError> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: ManifestLine = serde_json::from_str(line).map_err(|e| BenchError::Manifest {
            line: line_no,
            msg: e.to_string(),
        })?;
        let label = raw.label.parse::<GarmentClass>().map_err(|_| BenchError::UnknownLabel {
            line: line_no,
            label: raw.label.clone(),
        })?;
        if !seen.insert(raw.id.clone()) {
            return Err(BenchError::DuplicateId { line: line_no, id: raw.id });
        }
        records.push(DatasetRecord {
            id: raw.id,
            image: raw.image,
            label,
        });
    }
    Ok(records)
}

/// Images per class in reporting order.
pub fn class_counts(dataset: &[DatasetRecord]) -> [u64; 6] {
    let mut counts = [0u64; 6];
    for r in dataset {
        counts[r.label.index()] += 1;
    }
    counts
}
