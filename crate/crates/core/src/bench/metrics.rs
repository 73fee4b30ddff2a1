use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cellsim::GarmentClass;
use crate::classify::{outcome_index, outcome_name, ParsedLabel, ResponseLog, OUTCOMES};

use super::{BenchError, DatasetRecord};

/// Counts indexed by true class, then predicted outcome (six classes plus
/// the invalid column), both in reporting order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; OUTCOMES]; 6],
}

impl ConfusionMatrix {
    pub fn add(&mut self, truth: GarmentClass, predicted: ParsedLabel) {
        self.counts[truth.index()][outcome_index(predicted)] += 1;
    }

    /// The log must hold exactly one record per dataset id and nothing else.
    pub fn from_log(log: &ResponseLog, dataset: &[DatasetRecord]) -> Result<Self, BenchError> {
        let truth: HashMap<&str, GarmentClass> = dataset.iter().map(|r| (r.id.as_str(), r.label)).collect();
        let mut seen: HashMap<&str, usize> = HashMap::new();
        let mut m = Self::default();
        for rec in &log.records {
            let t = *truth
                .get(rec.id.as_str())
                .ok_or_else(|| BenchError::Coverage(format!("'{}' is not in the dataset", rec.id)))?;
            if seen.insert(rec.id.as_str(), 1).is_some() {
                return Err(BenchError::Coverage(format!("'{}' appears more than once", rec.id)));
            }
            m.add(t, rec.parsed);
        }
        if let Some(missing) = dataset.iter().find(|r| !seen.contains_key(r.id.as_str())) {
            return Err(BenchError::Coverage(format!("no response for '{}'", missing.id)));
        }
        Ok(m)
    }

    pub fn row_sum(&self, c: GarmentClass) -> u64 {
        self.counts[c.index()].iter().sum()
    }

    pub fn class_counts(&self) -> [u64; 6] {
        GarmentClass::ALL.map(|c| self.row_sum(c))
    }

    pub fn correct(&self, c: GarmentClass) -> u64 {
        self.counts[c.index()][c.index()]
    }

    pub fn trace(&self) -> u64 {
        GarmentClass::ALL.iter().map(|&c| self.correct(c)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Recall per true class; `None` for a class with no samples.
    pub fn per_class_accuracy(&self) -> [Option<f64>; 6] {
        GarmentClass::ALL.map(|c| {
            let n = self.row_sum(c);
            (n > 0).then(|| self.correct(c) as f64 / n as f64)
        })
    }

    /// `None` for an empty matrix.
    pub fn overall_accuracy(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| self.trace() as f64 / n as f64)
    }

    /// Grid with a header row of predicted outcomes and one row per true class.
    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["true".to_string()];
        header.extend((0..OUTCOMES).map(|i| outcome_name(i).to_string()));
        w.write_record(&header)?;
        for c in GarmentClass::ALL {
            let mut row = vec![c.as_str().to_string()];
            row.extend(self.counts[c.index()].iter().map(u64::to_string));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Splits a mixed log into one log per model, keeping record order.
pub fn split_by_model(log: &ResponseLog) -> BTreeMap<String, ResponseLog> {
    let mut out: BTreeMap<String, ResponseLog> = BTreeMap::new();
    for r in &log.records {
        out.entry(r.model.clone()).or_default().records.push(r.clone());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean_s: f64,
    pub p10_s: f64,
    pub p90_s: f64,
    pub n: usize,
}

/// Inclusive linear interpolation: rank `q * (n - 1)` between the floor and
/// ceiling order statistics. `sorted` must be ascending and non-empty.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let rank = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

pub fn timing_stats(latencies: &[f64]) -> Result<TimingStats, BenchError> {
    if latencies.is_empty() {
        return Err(BenchError::EmptySample);
    }
    if let Some(&bad) = latencies.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(BenchError::BadLatency(bad));
    }
    let mut sorted = latencies.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(TimingStats {
        mean_s: sorted.iter().sum::<f64>() / sorted.len() as f64,
        p10_s: percentile(&sorted, 0.1),
        p90_s: percentile(&sorted, 0.9),
        n: sorted.len(),
    })
}
