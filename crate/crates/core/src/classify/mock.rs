use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cellsim::GarmentClass;

use super::{
    check_timeout, ChatRequest, ClassifierBackend, ClassifyError, ConfusionProfile, ImagePayload,
    ParsedLabel, RawResponse,
};

pub const DEFAULT_INVALID_TEXT: &str = "The image shows a piece of fabric";

/// Simulated response time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum LatencyModel {
    Fixed { s: f64 },
    Uniform { min_s: f64, max_s: f64 },
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel::Uniform { min_s: 0.62, max_s: 0.69 }
    }
}

impl LatencyModel {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let ok = match *self {
            LatencyModel::Fixed { s } => s.is_finite() && s >= 0.0,
            LatencyModel::Uniform { min_s, max_s } => {
                min_s.is_finite() && max_s.is_finite() && min_s >= 0.0 && min_s <= max_s
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ClassifyError::InvalidDescriptor(format!("bad latency model {self:?}")))
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            LatencyModel::Fixed { s } => s,
            LatencyModel::Uniform { min_s, max_s } => min_s + (max_s - min_s) * rng.random::<f64>(),
        }
    }
}

/// Seeded confusion-profile classifier. Every request id gets its own
/// stream, so answers do not depend on call order or thread scheduling.
#[derive(Clone, Debug)]
pub struct MockBackend {
    pub model_name: String,
    pub profile: ConfusionProfile,
    pub seed: u64,
    pub latency: LatencyModel,
    pub invalid_text: String,
    pub timeout_s: f64,
}

impl MockBackend {
    pub fn new(model_name: &str, profile: ConfusionProfile, seed: u64) -> Self {
        Self {
            model_name: model_name.to_string(),
            profile,
            seed,
            latency: LatencyModel::default(),
            invalid_text: DEFAULT_INVALID_TEXT.to_string(),
            timeout_s: f64::INFINITY,
        }
    }

    pub fn identity(seed: u64) -> Self {
        Self::new("mock-identity", ConfusionProfile::identity(), seed)
    }

    fn stream(&self, request_id: &str) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(request_id.as_bytes());
        ChaCha8Rng::from_seed(h.finalize().into())
    }

    /// Label and latency for a request without wrapping them in a response.
    pub fn draw(&self, request_id: &str, true_class: GarmentClass) -> (ParsedLabel, f64) {
        let mut rng = self.stream(request_id);
        let label = self.profile.sample(true_class, rng.random::<f64>());
        (label, self.latency.draw(&mut rng))
    }
}

impl ClassifierBackend for MockBackend {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn classify(&self, _request: &ChatRequest, image: &ImagePayload) -> Result<RawResponse, ClassifyError> {
        let true_class = image
            .declared_class
            .ok_or_else(|| ClassifyError::MissingDeclaredClass(image.request_id.clone()))?;
        let (label, latency_s) = self.draw(&image.request_id, true_class);
        check_timeout(latency_s, self.timeout_s)?;
        let text = match label {
            ParsedLabel::Valid(c) => c.as_str().to_string(),
            ParsedLabel::Invalid(_) => self.invalid_text.clone(),
        };
        Ok(RawResponse {
            text,
            latency_s,
            model_name: self.model_name.clone(),
            request_id: image.request_id.clone(),
        })
    }
}
