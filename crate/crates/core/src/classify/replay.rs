use std::collections::HashMap;

use super::{
    check_timeout, ChatRequest, ClassifierBackend, ClassifyError, ImagePayload, RawResponse,
    ResponseLog, ResponseRecord,
};

/// Answers from a recorded response log, keyed by request id.
#[derive(Clone, Debug)]
pub struct ReplayBackend {
    model_name: String,
    by_id: HashMap<String, ResponseRecord>,
    pub timeout_s: f64,
}

impl ReplayBackend {
    /// With `model` set, only that model's records are used; otherwise the
    /// log must not hold two records for one id.
    pub fn new(log: &ResponseLog, model: Option<&str>) -> Result<Self, ClassifyError> {
        let mut by_id = HashMap::new();
        for r in &log.records {
            if model.is_some_and(|m| m != r.model) {
                continue;
            }
            if by_id.insert(r.id.clone(), r.clone()).is_some() {
                return Err(ClassifyError::InvalidDescriptor(format!(
                    "replay log holds more than one record for '{}'",
                    r.id
                )));
            }
        }
        let model_name = match model {
            Some(m) => m.to_string(),
            None => log.records.first().map(|r| r.model.clone()).unwrap_or_default(),
        };
        Ok(Self {
            model_name,
            by_id,
            timeout_s: f64::INFINITY,
        })
    }
}

impl ClassifierBackend for ReplayBackend {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn classify(&self, _request: &ChatRequest, image: &ImagePayload) -> Result<RawResponse, ClassifyError> {
        let rec = self
            .by_id
            .get(&image.request_id)
            .ok_or_else(|| ClassifyError::UnknownRequest(image.request_id.clone()))?;
        check_timeout(rec.latency_s, self.timeout_s)?;
        Ok(RawResponse {
            text: rec.raw.clone(),
            latency_s: rec.latency_s,
            model_name: rec.model.clone(),
            request_id: rec.id.clone(),
        })
    }
}
