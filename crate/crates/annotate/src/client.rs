//! Chat-completion client. The backend trait is one attempt over the wire;
//! retry, backoff, and the in-flight cap live in [`AnnotationClient`] so the
//! mock and HTTP paths share identical failure semantics.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::AnnotateError;

/// One prompt exchange: a versioned template id, the rendered prompt text,
/// and any attached PNG-encoded views.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub template_id: &'static str,
    pub prompt: String,
    pub images: Vec<Vec<u8>>,
}

/// A single completion attempt. Implementations must not retry internally.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, AnnotateError>;
}

fn default_endpoint() -> String {
    "http://127.0.0.1:8080/v1/chat/completions".to_string()
}

fn default_credential_env() -> String {
    "R2SIM_ANNOTATION_KEY".to_string()
}

fn default_model() -> String {
    "vision-default".to_string()
}

fn default_max_retries() -> u32 {
    2
}

fn default_timeout_seconds() -> f64 {
    30.0
}

fn default_max_in_flight() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationClientConfig {
    /// Chat-completions endpoint URL.
    pub endpoint: String,
    /// Name of the environment variable holding the bearer credential. The
    /// value itself is never stored in config files.
    pub credential_env: String,
    pub model: String,
    /// Additional attempts after the first; total attempts = max_retries + 1.
    pub max_retries: u32,
    pub timeout_seconds: f64,
    /// Upper bound on concurrent requests through one client.
    pub max_in_flight: usize,
}

impl Default for AnnotationClientConfig {
    fn default() -> Self {
        Self {
            endpoint: default_endpoint(),
            credential_env: default_credential_env(),
            model: default_model(),
            max_retries: default_max_retries(),
            timeout_seconds: default_timeout_seconds(),
            max_in_flight: default_max_in_flight(),
        }
    }
}

impl AnnotationClientConfig {
    pub fn validate(&self) -> Result<(), AnnotateError> {
        if self.endpoint.is_empty() {
            return Err(AnnotateError::Config("endpoint must not be empty".into()));
        }
        if self.credential_env.is_empty() {
            return Err(AnnotateError::Config(
                "credential_env must not be empty".into(),
            ));
        }
        if self.model.is_empty() {
            return Err(AnnotateError::Config("model must not be empty".into()));
        }
        if !self.timeout_seconds.is_finite() || self.timeout_seconds <= 0.0 {
            return Err(AnnotateError::Config(format!(
                "timeout_seconds must be positive, got {}",
                self.timeout_seconds
            )));
        }
        if self.max_in_flight == 0 {
            return Err(AnnotateError::Config(
                "max_in_flight must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Delay before retry number `attempt` (1-based count of attempts already
/// made): 50ms doubling per attempt, capped at 2s. Non-decreasing in
/// `attempt` by construction.
pub fn backoff_delay(attempt: u32) -> Duration {
    const BASE_MS: u64 = 50;
    const CAP_MS: u64 = 2_000;
    let factor = 1u64.checked_shl(attempt.saturating_sub(1)).unwrap_or(u64::MAX);
    Duration::from_millis(BASE_MS.saturating_mul(factor).min(CAP_MS))
}

/// Serializes a request into the chat-completions body. With
/// `redact_images` the base64 payload is replaced by a fixed marker so the
/// result is stable regardless of encoder output.
pub fn chat_body(model: &str, request: &ChatRequest, redact_images: bool) -> Value {
    let mut content = vec![json!({"type": "text", "text": request.prompt})];
    for png in &request.images {
        let url = if redact_images {
            "data:image/png;base64,<image bytes omitted>".to_string()
        } else {
            format!("data:image/png;base64,{}", BASE64.encode(png))
        };
        content.push(json!({"type": "image_url", "image_url": {"url": url}}));
    }
    json!({
        "model": model,
        "messages": [{"role": "user", "content": content}],
        "temperature": 0,
    })
}

struct Slots {
    free: Mutex<usize>,
    cond: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cond.wait(free).unwrap();
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        let mut free = self.0.free.lock().unwrap();
        *free += 1;
        self.0.cond.notify_one();
    }
}

/// Backend plus policy: bounded concurrency and transport-only retries.
pub struct AnnotationClient {
    backend: Box<dyn ChatBackend>,
    config: AnnotationClientConfig,
    slots: Slots,
}

impl AnnotationClient {
    pub fn new(
        backend: Box<dyn ChatBackend>,
        config: AnnotationClientConfig,
    ) -> Result<Self, AnnotateError> {
        config.validate()?;
        let slots = Slots {
            free: Mutex::new(config.max_in_flight),
            cond: Condvar::new(),
        };
        Ok(Self {
            backend,
            config,
            slots,
        })
    }

    pub fn config(&self) -> &AnnotationClientConfig {
        &self.config
    }

    /// Runs the request, retrying transport failures up to
    /// `max_retries` times. Validation and reply errors surface immediately:
    /// resending an ill-formed request cannot fix it.
    pub fn complete(&self, request: &ChatRequest) -> Result<String, AnnotateError> {
        let _slot = self.slots.acquire();
        let total = self.config.max_retries + 1;
        let mut last_message = String::new();
        for attempt in 1..=total {
            match self.backend.complete(request) {
                Ok(reply) => return Ok(reply),
                Err(AnnotateError::Transport { message, .. }) => {
                    log::warn!(
                        "transport failure on attempt {attempt}/{total} for {}: {message}",
                        request.template_id
                    );
                    last_message = message;
                    if attempt < total {
                        std::thread::sleep(backoff_delay(attempt));
                    }
                }
                Err(other) => return Err(other),
            }
        }
        Err(AnnotateError::Transport {
            message: last_message,
            attempts: total,
        })
    }
}

/// reqwest-backed production path. The credential is read from the
/// environment at request time so rotation does not require a new client.
pub struct HttpBackend {
    config: AnnotationClientConfig,
    http: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(config: AnnotationClientConfig) -> Result<Self, AnnotateError> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_seconds))
            .build()
            .map_err(|e| AnnotateError::Config(format!("http client: {e}")))?;
        Ok(Self { config, http })
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, AnnotateError> {
        let var = &self.config.credential_env;
        let key = std::env::var(var).map_err(|_| AnnotateError::MissingCredential {
            var: var.clone(),
        })?;
        let body = chat_body(&self.config.model, request, false);
        let response = self
            .http
            .post(&self.config.endpoint)
            .bearer_auth(key)
            .json(&body)
            .send()
            .map_err(|e| AnnotateError::Transport {
                message: e.to_string(),
                attempts: 1,
            })?;
        let status = response.status();
        if status.is_server_error() {
            return Err(AnnotateError::Transport {
                message: format!("server returned {status}"),
                attempts: 1,
            });
        }
        if !status.is_success() {
            return Err(AnnotateError::Config(format!(
                "endpoint rejected request: {status}"
            )));
        }
        let parsed: Value = response.json().map_err(|e| AnnotateError::Transport {
            message: format!("reading response body: {e}"),
            attempts: 1,
        })?;
        parsed
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| AnnotateError::BadReply {
                reason: "response has no choices[0].message.content string".into(),
            })
    }
}
