//! Classifier client layer: the fixed chat prompt, strict single-word
//! scoring, and interchangeable backends (live chat server, seeded
//! confusion-profile mock, replay of a recorded response log).

mod live;
mod log;
mod mock;
mod parse;
mod profile;
mod prompt;
mod replay;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cellsim::GarmentClass;

pub use live::{chat_body, LiveBackend};
pub use log::{ResponseLog, ResponseRecord};
pub use mock::{LatencyModel, MockBackend, DEFAULT_INVALID_TEXT};
pub use parse::{parse_response, parse_response_with, parse_text, InvalidReason, ParseOptions, ParsedLabel};
pub use profile::{outcome_index, outcome_name, ConfusionProfile, INVALID_OUTCOME, OUTCOMES};
pub use prompt::{build_prompt, ChatRequest, SYSTEM_PROMPT, USER_PROMPT};
pub use replay::ReplayBackend;

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("no answer within {timeout_s} s")]
    Timeout { timeout_s: f64 },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no recorded response for request '{0}'")]
    UnknownRequest(String),
    #[error("request '{0}' carries no declared class for the mock backend")]
    MissingDeclaredClass(String),
    #[error("invalid confusion profile: {0}")]
    InvalidProfile(String),
    #[error("invalid backend configuration: {0}")]
    InvalidDescriptor(String),
    #[error("line {line}: {msg}")]
    LogFormat { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub text: String,
    pub latency_s: f64,
    pub model_name: String,
    pub request_id: String,
}

/// One image to classify. `declared_class` is ground truth known to the
/// simulator; only the mock backend reads it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImagePayload {
    pub request_id: String,
    pub png: Vec<u8>,
    pub declared_class: Option<GarmentClass>,
}

impl ImagePayload {
    pub fn new(request_id: &str, png: Vec<u8>) -> Self {
        Self {
            request_id: request_id.to_string(),
            png,
            declared_class: None,
        }
    }

    pub fn declared(request_id: &str, png: Vec<u8>, class: GarmentClass) -> Self {
        Self {
            declared_class: Some(class),
            ..Self::new(request_id, png)
        }
    }
}

pub trait ClassifierBackend: Send + Sync {
    fn model_name(&self) -> &str;

    /// `request` already carries the image.
    fn classify(&self, request: &ChatRequest, image: &ImagePayload) -> Result<RawResponse, ClassifyError>;
}

/// Attaches the image to the prompt and asks the backend once.
pub fn classify_image(
    backend: &dyn ClassifierBackend,
    image: &ImagePayload,
    request: &ChatRequest,
) -> Result<RawResponse, ClassifyError> {
    let request = request.clone().with_image(image.png.clone());
    backend.classify(&request, image)
}

pub(crate) fn check_timeout(latency_s: f64, timeout_s: f64) -> Result<(), ClassifyError> {
    if latency_s > timeout_s {
        Err(ClassifyError::Timeout { timeout_s })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSource {
    LiveHttp {
        endpoint: String,
    },
    MockProfile {
        /// Profile JSON; identity when absent.
        #[serde(default)]
        profile: Option<PathBuf>,
        #[serde(default)]
        latency: LatencyModel,
    },
    ReplayLog {
        log: PathBuf,
    },
}

/// Which classifier to talk to. The enum makes the single source explicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    #[serde(flatten)]
    pub source: BackendSource,
    pub model_name: String,
    pub timeout_s: f64,
}

impl Default for BackendDescriptor {
    fn default() -> Self {
        Self {
            source: BackendSource::MockProfile {
                profile: None,
                latency: LatencyModel::default(),
            },
            model_name: "mock".to_string(),
            timeout_s: 30.0,
        }
    }
}

impl BackendDescriptor {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(ClassifyError::InvalidDescriptor(format!(
                "timeout_s {} must be positive",
                self.timeout_s
            )));
        }
        if let BackendSource::MockProfile { latency, .. } = &self.source {
            latency.validate()?;
        }
        Ok(())
    }

    /// Instantiates the backend; `seed` only matters for the mock.
    pub fn build(&self, seed: u64) -> Result<Box<dyn ClassifierBackend>, ClassifyError> {
        self.validate()?;
        Ok(match &self.source {
            BackendSource::LiveHttp { endpoint } => {
                Box::new(LiveBackend::new(endpoint, &self.model_name, self.timeout_s)?)
            }
            BackendSource::MockProfile { profile, latency } => {
                let profile = match profile {
                    Some(p) => ConfusionProfile::load(p)?,
                    None => ConfusionProfile::identity(),
                };
                let mut m = MockBackend::new(&self.model_name, profile, seed);
                m.latency = *latency;
                m.timeout_s = self.timeout_s;
                Box::new(m)
            }
            BackendSource::ReplayLog { log } => {
                let log = ResponseLog::load(log)?;
                let model = (!self.model_name.is_empty()).then_some(self.model_name.as_str());
                let mut r = ReplayBackend::new(&log, model)?;
                r.timeout_s = self.timeout_s;
                Box::new(r)
            }
        })
    }
}
