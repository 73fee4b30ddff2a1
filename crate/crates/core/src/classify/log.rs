use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClassifyError, ParsedLabel};

/// One scored classifier answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub id: String,
    pub model: String,
    pub raw: String,
    pub parsed: ParsedLabel,
    pub latency_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware: Option<String>,
}

/// Ordered JSON-lines log of classifier answers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResponseLog {
    pub records: Vec<ResponseRecord>,
}

impl ResponseLog {
    pub fn new(records: Vec<ResponseRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifyError> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_jsonl().as_bytes())?;
        Ok(())
    }

    /// Blank lines are skipped; errors carry 1-based line numbers.
    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let reader = BufReader::new(fs::File::open(path)?);
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ResponseRecord = serde_json::from_str(&line).map_err(|e| ClassifyError::LogFormat {
                line: i + 1,
                msg: e.to_string(),
            })?;
            if !(rec.latency_s.is_finite() && rec.latency_s >= 0.0) {
                return Err(ClassifyError::LogFormat {
                    line: i + 1,
                    msg: format!("latency {} is not a finite non-negative number", rec.latency_s),
                });
            }
            records.push(rec);
        }
        Ok(Self { records })
    }

    pub fn latencies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.latency_s).collect()
    }
}
