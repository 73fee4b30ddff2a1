use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cellsim::GarmentClass;

use super::{ClassifyError, InvalidReason, ParsedLabel};

/// Number of predicted outcomes: the six classes plus one invalid bucket.
pub const OUTCOMES: usize = 7;
pub const INVALID_OUTCOME: usize = 6;

pub fn outcome_index(label: ParsedLabel) -> usize {
    match label {
        ParsedLabel::Valid(c) => c.index(),
        ParsedLabel::Invalid(_) => INVALID_OUTCOME,
    }
}

pub fn outcome_name(i: usize) -> &'static str {
    if i == INVALID_OUTCOME {
        "invalid"
    } else {
        GarmentClass::ALL[i].as_str()
    }
}

/// Per-true-class distribution over predicted outcomes, used by the mock
/// backend to emulate a model's error behavior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDoc", into = "ProfileDoc")]
pub struct ConfusionProfile {
    rows: [[f64; OUTCOMES]; 6],
}

impl ConfusionProfile {
    pub fn new(rows: [[f64; OUTCOMES]; 6]) -> Result<Self, ClassifyError> {
        for (c, row) in GarmentClass::ALL.iter().zip(&rows) {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(ClassifyError::InvalidProfile(format!("row {c} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ClassifyError::InvalidProfile(format!("row {c} sums to {sum}")));
            }
        }
        Ok(Self { rows })
    }

    /// Always answers the true class.
    pub fn identity() -> Self {
        let mut rows = [[0.0; OUTCOMES]; 6];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { rows }
    }

    /// `correct` on the diagonal, the rest spread evenly over the other six
    /// outcomes (invalid included).
    pub fn uniform_error(correct: f64) -> Result<Self, ClassifyError> {
        Self::from_accuracies([correct; 6])
    }

    /// Diagonal from per-class accuracies in reporting order, errors spread
    /// evenly.
    pub fn from_accuracies(acc: [f64; 6]) -> Result<Self, ClassifyError> {
        let mut rows = [[0.0; OUTCOMES]; 6];
        for (i, row) in rows.iter_mut().enumerate() {
            let miss = (1.0 - acc[i]) / (OUTCOMES - 1) as f64;
            for (j, p) in row.iter_mut().enumerate() {
                *p = if i == j { acc[i] } else { miss };
            }
        }
        Self::new(rows)
    }

    pub fn row(&self, true_class: GarmentClass) -> &[f64; OUTCOMES] {
        &self.rows[true_class.index()]
    }

    pub fn set_row(&mut self, true_class: GarmentClass, row: [f64; OUTCOMES]) -> Result<(), ClassifyError> {
        let mut rows = self.rows;
        rows[true_class.index()] = row;
        *self = Self::new(rows)?;
        Ok(())
    }

    /// Inverse-CDF lookup of a uniform draw in [0, 1).
    pub fn sample(&self, true_class: GarmentClass, u: f64) -> ParsedLabel {
        let row = self.row(true_class);
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, p) in row.iter().enumerate() {
            if *p > 0.0 {
                last_nonzero = i;
                acc += p;
                if u < acc {
                    return Self::label_of(i);
                }
            }
        }
        // rounding slack at the top of the CDF
        Self::label_of(last_nonzero)
    }

    fn label_of(i: usize) -> ParsedLabel {
        if i == INVALID_OUTCOME {
            ParsedLabel::Invalid(InvalidReason::MultiWord)
        } else {
            ParsedLabel::Valid(GarmentClass::ALL[i])
        }
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// File form: `{"<true class>": {"<outcome>": p, ...}, ...}`; omitted
/// outcomes are zero, all six rows are required.
#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct ProfileDoc(BTreeMap<String, BTreeMap<String, f64>>);

impl TryFrom<ProfileDoc> for ConfusionProfile {
    type Error = ClassifyError;

    fn try_from(doc: ProfileDoc) -> Result<Self, Self::Error> {
        let mut rows = [[0.0; OUTCOMES]; 6];
        for (name, entries) in &doc.0 {
            let c: GarmentClass = name
                .parse()
                .map_err(|_| ClassifyError::InvalidProfile(format!("unknown true class '{name}'")))?;
            for (outcome, p) in entries {
                let j = (0..OUTCOMES)
                    .find(|&j| outcome_name(j) == outcome)
                    .ok_or_else(|| ClassifyError::InvalidProfile(format!("unknown outcome '{outcome}'")))?;
                rows[c.index()][j] = *p;
            }
        }
        for c in GarmentClass::ALL {
            if !doc.0.contains_key(c.as_str()) {
                return Err(ClassifyError::InvalidProfile(format!("missing row for {c}")));
            }
        }
        ConfusionProfile::new(rows)
    }
}

impl From<ConfusionProfile> for ProfileDoc {
    fn from(p: ConfusionProfile) -> Self {
        let mut map = BTreeMap::new();
        for c in GarmentClass::ALL {
            let row = p.row(c);
            let entries = (0..OUTCOMES)
                .filter(|&j| row[j] > 0.0)
                .map(|j| (outcome_name(j).to_string(), row[j]))
                .collect();
            map.insert(c.as_str().to_string(), entries);
        }
        ProfileDoc(map)
    }
}
