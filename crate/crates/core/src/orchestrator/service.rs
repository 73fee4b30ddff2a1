use std::collections::{BTreeMap, HashSet};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cellsim::{BoundingBox, CameraModel, RgbdFrame};
use crate::classify::{classify_image, ChatRequest, ClassifierBackend, ClassifyError, ImagePayload, RawResponse};
use crate::grasp::{predict_grasp, GraspCandidate, GraspParams};

pub const GRASP_SERVICE: &str = "grasp_prediction";
pub const CLASSIFY_SERVICE: &str = "garment_classification";

#[derive(Clone, Debug)]
pub struct GraspRequest {
    pub frame: RgbdFrame,
    pub roi: BoundingBox,
    pub camera: CameraModel,
}

#[derive(Clone, Debug)]
pub enum ServiceRequest {
    Grasp(GraspRequest),
    Classify(ImagePayload),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ServiceResponse {
    Grasp(Option<GraspCandidate>),
    Classify(RawResponse),
}

/// One request/response exchange. Requests own their data so handlers can
/// run on any thread.
#[derive(Clone, Debug)]
pub struct ServiceEnvelope {
    pub service_name: String,
    pub request: ServiceRequest,
    pub timeout_s: f64,
    pub correlation_id: u64,
}

/// Handler result with the (simulated or measured) time it took.
#[derive(Clone, Debug, PartialEq)]
pub struct Timed<T> {
    pub value: T,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HandlerFailure {
    TimedOut { elapsed_s: f64 },
    Failed(String),
}

pub trait ServiceHandler: Send + Sync {
    fn handle(&self, request: ServiceRequest) -> Result<Timed<ServiceResponse>, HandlerFailure>;
}

/// How a service's deadline is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    /// The handler reports its own duration; nothing sleeps.
    #[default]
    Logical,
    /// The handler runs on a worker thread and is abandoned at the deadline.
    WallClock,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ServiceOutcome {
    Response { response: ServiceResponse, elapsed_s: f64 },
    Timeout { elapsed_s: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ServiceError {
    #[error("no handler registered for service '{0}'")]
    Unregistered(String),
    #[error("correlation id {0} was already used")]
    DuplicateCorrelation(u64),
    #[error("timeout {0} s must be positive")]
    InvalidTimeout(f64),
    #[error("service '{service}' failed: {msg}")]
    Failed { service: String, msg: String },
}

struct Registration {
    handler: Arc<dyn ServiceHandler>,
    mode: ClockMode,
}

/// Named request/response services with exactly-once delivery per
/// correlation id and a logical clock.
#[derive(Default)]
pub struct ServiceBus {
    services: BTreeMap<String, Registration>,
    used_ids: HashSet<u64>,
    next_id: u64,
    clock_s: f64,
    calls: BTreeMap<String, u64>,
}

impl ServiceBus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, handler: Arc<dyn ServiceHandler>, mode: ClockMode) {
        self.services.insert(name.to_string(), Registration { handler, mode });
    }

    pub fn next_correlation_id(&mut self) -> u64 {
        while self.used_ids.contains(&self.next_id) {
            self.next_id += 1;
        }
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Seconds of service time spent so far.
    pub fn clock_s(&self) -> f64 {
        self.clock_s
    }

    /// Handler invocations per service name.
    pub fn calls(&self, service: &str) -> u64 {
        self.calls.get(service).copied().unwrap_or(0)
    }

    pub fn envelope(&mut self, service: &str, request: ServiceRequest, timeout_s: f64) -> ServiceEnvelope {
        ServiceEnvelope {
            service_name: service.to_string(),
            request,
            timeout_s,
            correlation_id: self.next_correlation_id(),
        }
    }

    pub fn call_service(&mut self, envelope: ServiceEnvelope) -> Result<ServiceOutcome, ServiceError> {
        if !(envelope.timeout_s.is_finite() && envelope.timeout_s > 0.0) {
            return Err(ServiceError::InvalidTimeout(envelope.timeout_s));
        }
        let reg = self
            .services
            .get(&envelope.service_name)
            .ok_or_else(|| ServiceError::Unregistered(envelope.service_name.clone()))?;
        if !self.used_ids.insert(envelope.correlation_id) {
            return Err(ServiceError::DuplicateCorrelation(envelope.correlation_id));
        }
        *self.calls.entry(envelope.service_name.clone()).or_insert(0) += 1;

        let timeout = envelope.timeout_s;
        let result = match reg.mode {
            ClockMode::Logical => match reg.handler.handle(envelope.request) {
                Ok(t) if t.elapsed_s > timeout => Err(HandlerFailure::TimedOut { elapsed_s: timeout }),
                other => other,
            },
            ClockMode::WallClock => {
                let handler = Arc::clone(&reg.handler);
                let (tx, rx) = mpsc::channel();
                let start = Instant::now();
                let request = envelope.request;
                std::thread::spawn(move || {
                    // the receiver may be gone after a timeout
                    let _ = tx.send(handler.handle(request));
                });
                match rx.recv_timeout(Duration::from_secs_f64(timeout)) {
                    Ok(r) => r.map(|t| Timed {
                        value: t.value,
                        elapsed_s: start.elapsed().as_secs_f64(),
                    }),
                    Err(mpsc::RecvTimeoutError::Timeout) => Err(HandlerFailure::TimedOut { elapsed_s: timeout }),
                    Err(mpsc::RecvTimeoutError::Disconnected) => {
                        Err(HandlerFailure::Failed("handler thread panicked".into()))
                    }
                }
            }
        };
        match result {
            Ok(t) => {
                self.clock_s += t.elapsed_s;
                Ok(ServiceOutcome::Response {
                    response: t.value,
                    elapsed_s: t.elapsed_s,
                })
            }
            Err(HandlerFailure::TimedOut { elapsed_s }) => {
                let elapsed_s = elapsed_s.min(timeout);
                self.clock_s += elapsed_s;
                Ok(ServiceOutcome::Timeout { elapsed_s })
            }
            Err(HandlerFailure::Failed(msg)) => Err(ServiceError::Failed {
                service: envelope.service_name,
                msg,
            }),
        }
    }
}

/// Height-prominence grasp predictor behind a service boundary.
pub struct GraspService {
    pub params: GraspParams,
    /// Simulated inference time per request.
    pub latency_s: f64,
}

impl ServiceHandler for GraspService {
    fn handle(&self, request: ServiceRequest) -> Result<Timed<ServiceResponse>, HandlerFailure> {
        let ServiceRequest::Grasp(r) = request else {
            return Err(HandlerFailure::Failed("grasp service got a non-grasp request".into()));
        };
        Ok(Timed {
            value: ServiceResponse::Grasp(predict_grasp(&r.frame, &r.roi, &r.camera, &self.params)),
            elapsed_s: self.latency_s,
        })
    }
}

/// Classifier backend behind a service boundary.
pub struct ClassifyService {
    pub backend: Box<dyn ClassifierBackend>,
    pub prompt: ChatRequest,
}

impl ServiceHandler for ClassifyService {
    fn handle(&self, request: ServiceRequest) -> Result<Timed<ServiceResponse>, HandlerFailure> {
        let ServiceRequest::Classify(image) = request else {
            return Err(HandlerFailure::Failed("classifier got a non-image request".into()));
        };
        match classify_image(self.backend.as_ref(), &image, &self.prompt) {
            Ok(raw) => Ok(Timed {
                elapsed_s: raw.latency_s,
                value: ServiceResponse::Classify(raw),
            }),
            Err(ClassifyError::Timeout { timeout_s }) => Err(HandlerFailure::TimedOut { elapsed_s: timeout_s }),
            Err(e) => Err(HandlerFailure::Failed(e.to_string())),
        }
    }
}
