use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cellsim::GarmentClass;
use crate::classify::{InvalidReason, ParsedLabel, ResponseLog, ResponseRecord};

use super::{BenchError, DatasetRecord};

/// Member models and their voting weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    members: Vec<(String, f64)>,
}

impl EnsembleSpec {
    pub fn new(members: Vec<(String, f64)>) -> Result<Self, BenchError> {
        if members.is_empty() {
            return Err(BenchError::InvalidEnsemble("at least one member is required".into()));
        }
        for (i, (name, w)) in members.iter().enumerate() {
            if name.is_empty() {
                return Err(BenchError::InvalidEnsemble("empty member name".into()));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(BenchError::InvalidEnsemble(format!("weight {w} of '{name}' is not a non-negative number")));
            }
            if members[..i].iter().any(|(n, _)| n == name) {
                return Err(BenchError::InvalidEnsemble(format!("'{name}' is listed twice")));
            }
        }
        if members.iter().map(|(_, w)| w).sum::<f64>() <= 0.0 {
            return Err(BenchError::InvalidEnsemble("weights sum to zero".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(String, f64)] {
        &self.members
    }

    /// Weights scaled to sum to one.
    pub fn normalized(&self) -> Vec<(String, f64)> {
        let sum: f64 = self.members.iter().map(|(_, w)| w).sum();
        self.members.iter().map(|(n, w)| (n.clone(), w / sum)).collect()
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|(n, w)| format!("{n}={w}")).collect();
        write!(f, "ensemble({})", parts.join(","))
    }
}

/// `name=weight,name=weight`. Names may contain `:` and `=`; the weight is
/// whatever follows the last `=`.
impl FromStr for EnsembleSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let members = s
            .split(',')
            .map(|part| {
                let (name, w) = part
                    .trim()
                    .rsplit_once('=')
                    .ok_or_else(|| BenchError::InvalidEnsemble(format!("'{part}' is not name=weight")))?;
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| BenchError::InvalidEnsemble(format!("bad weight in '{part}'")))?;
                Ok((name.trim().to_string(), w))
            })
            .collect::<Result<Vec<_>, BenchError>>()?;
        Self::new(members)
    }
}

/// Hard weighted vote over parsed labels. Each valid member answer adds the
/// member's weight to its class; ties go to the class earlier in reporting
/// order; a record with no valid answer is `invalid(not_a_class)`.
/// The ensemble latency is that of its slowest member.
pub fn ensemble_vote(
    logs: &[ResponseLog],
    spec: &EnsembleSpec,
    dataset: &[DatasetRecord],
) -> Result<ResponseLog, BenchError> {
    let mut by_model: HashMap<&str, HashMap<&str, &ResponseRecord>> = HashMap::new();
    for log in logs {
        for r in &log.records {
            by_model.entry(r.model.as_str()).or_default().insert(r.id.as_str(), r);
        }
    }
    let weights = spec.normalized();
    let members = weights
        .iter()
        .map(|(name, w)| {
            by_model
                .get(name.as_str())
                .map(|m| (name.as_str(), m, *w))
                .ok_or_else(|| BenchError::MissingMember(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let model = spec.to_string();
    let mut records = Vec::with_capacity(dataset.len());
    for d in dataset {
        let mut tally = [0.0f64; 6];
        let mut any_valid = false;
        let mut latency = 0.0f64;
        for (name, answers, w) in &members {
            let r = answers
                .get(d.id.as_str())
                .ok_or_else(|| BenchError::Coverage(format!("member '{name}' has no response for '{}'", d.id)))?;
            latency = latency.max(r.latency_s);
            if let ParsedLabel::Valid(c) = r.parsed {
                tally[c.index()] += w;
                any_valid = true;
            }
        }
        let parsed = if any_valid {
            let mut best = 0;
            for i in 1..6 {
                if tally[i] > tally[best] {
                    best = i;
                }
            }
            ParsedLabel::Valid(GarmentClass::ALL[best])
        } else {
            ParsedLabel::Invalid(InvalidReason::NotAClass)
        };
        records.push(ResponseRecord {
            id: d.id.clone(),
            model: model.clone(),
            raw: parsed.class().map(|c| c.as_str().to_string()).unwrap_or_default(),
            parsed,
            latency_s: latency,
            hardware: None,
        });
    }
    Ok(ResponseLog::new(records))
}
