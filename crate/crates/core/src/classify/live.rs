use std::time::{Duration, Instant};

use base64::Engine;
use serde_json::{json, Value};

use super::{ChatRequest, ClassifierBackend, ClassifyError, ImagePayload, RawResponse};

/// Blocking client for a local model server's chat endpoint.
#[derive(Clone, Debug)]
pub struct LiveBackend {
    endpoint: String,
    model_name: String,
    timeout: Duration,
    client: reqwest::blocking::Client,
}

impl LiveBackend {
    pub fn new(endpoint: &str, model_name: &str, timeout_s: f64) -> Result<Self, ClassifyError> {
        if !(timeout_s.is_finite() && timeout_s > 0.0) {
            return Err(ClassifyError::InvalidDescriptor(format!("timeout {timeout_s} must be positive")));
        }
        let timeout = Duration::from_secs_f64(timeout_s);
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ClassifyError::Transport(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model_name: model_name.to_string(),
            timeout,
            client,
        })
    }

    pub fn chat_url(&self) -> String {
        format!("{}/api/chat", self.endpoint)
    }
}

/// Request body in the chat wire shape, images base64-encoded.
pub fn chat_body(request: &ChatRequest) -> Value {
    let b64 = base64::engine::general_purpose::STANDARD;
    let images: Vec<String> = request.images.iter().map(|png| b64.encode(png)).collect();
    json!({
        "model": request.model_name,
        "messages": [
            {"role": "system", "content": request.system_prompt},
            {"role": "user", "content": request.user_prompt, "images": images},
        ],
        "stream": false,
    })
}

impl ClassifierBackend for LiveBackend {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn classify(&self, request: &ChatRequest, image: &ImagePayload) -> Result<RawResponse, ClassifyError> {
        let map_err = |e: reqwest::Error| {
            if e.is_timeout() {
                ClassifyError::Timeout {
                    timeout_s: self.timeout.as_secs_f64(),
                }
            } else {
                ClassifyError::Transport(e.to_string())
            }
        };
        let start = Instant::now();
        let resp = self
            .client
            .post(self.chat_url())
            .json(&chat_body(request))
            .send()
            .map_err(map_err)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ClassifyError::Transport(format!("server answered {status}")));
        }
        let body: Value = resp.json().map_err(map_err)?;
        let latency_s = start.elapsed().as_secs_f64();
        let text = body
            .pointer("/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| ClassifyError::Transport("response lacks message.content".into()))?;
        Ok(RawResponse {
            text: text.to_string(),
            latency_s,
            model_name: self.model_name.clone(),
            request_id: image.request_id.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::build_prompt;

    #[test]
    fn body_shape() {
        let req = build_prompt("gemma3:12b").with_image(vec![1, 2, 3]);
        let body = chat_body(&req);
        assert_eq!(body["stream"], json!(false));
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["images"][0], "AQID");
        assert_eq!(body["messages"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        // port 9 on localhost: nothing listens in the sandbox
        let b = LiveBackend::new("http://127.0.0.1:9", "m", 1.0).unwrap();
        let err = b
            .classify(&build_prompt("m").with_image(vec![0]), &ImagePayload::new("a", vec![0]))
            .unwrap_err();
        assert!(matches!(err, ClassifyError::Transport(_) | ClassifyError::Timeout { .. }));
    }
}
