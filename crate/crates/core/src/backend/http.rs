use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{strip_stop, BackendError, CompletionRequest, CompletionResponse, LlmBackend, TokenCounts};

const BODY_EXCERPT_CHARS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiShape {
    /// `POST /v1/completions` with a raw prompt.
    Completions,
    /// `POST /v1/chat/completions`; the prompt becomes a single user message.
    Chat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpSettings {
    pub endpoint: String,
    pub model: String,
    pub api_shape: ApiShape,
    /// Environment variable holding the bearer token. Unset or empty
    /// variables send no `Authorization` header.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub max_in_flight: usize,
}

impl Default for HttpSettings {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000".into(),
            model: "default".into(),
            api_shape: ApiShape::Chat,
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120.0,
            max_retries: 2,
            retry_backoff_ms: 500,
            max_in_flight: 4,
        }
    }
}

impl HttpSettings {
    pub fn url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        let route = match self.api_shape {
            ApiShape::Completions => "completions",
            ApiShape::Chat => "chat/completions",
        };
        if base.ends_with("/v1") {
            format!("{base}/{route}")
        } else {
            format!("{base}/v1/{route}")
        }
    }
}

/// Counting gate bounding concurrent requests.
#[derive(Debug)]
struct InFlightGate {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

impl InFlightGate {
    fn new(limit: usize) -> Self {
        Self { limit: limit.max(1), active: Mutex::new(0), freed: Condvar::new() }
    }

    fn acquire(&self) -> InFlightPermit<'_> {
        let mut active = self.active.lock().expect("gate poisoned");
        while *active >= self.limit {
            active = self.freed.wait(active).expect("gate poisoned");
        }
        *active += 1;
        InFlightPermit { gate: self }
    }
}

struct InFlightPermit<'a> {
    gate: &'a InFlightGate,
}

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        *self.gate.active.lock().expect("gate poisoned") -= 1;
        self.gate.freed.notify_one();
    }
}

/// OpenAI-compatible completion client with bounded retries.
#[derive(Debug)]
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    settings: HttpSettings,
    api_key: Option<String>,
    gate: InFlightGate,
}

impl HttpBackend {
    pub fn new(settings: HttpSettings) -> Result<Self, BackendError> {
        let api_key = std::env::var(&settings.api_key_env).ok().filter(|k| !k.is_empty());
        Self::with_api_key(settings, api_key)
    }

    pub fn with_api_key(settings: HttpSettings, api_key: Option<String>) -> Result<Self, BackendError> {
        if settings.timeout_secs.is_nan() || settings.timeout_secs <= 0.0 {
            return Err(BackendError::InvalidRequest("timeout_secs must be positive".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(settings.timeout_secs))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let gate = InFlightGate::new(settings.max_in_flight);
        Ok(Self { client, settings, api_key, gate })
    }

    pub fn settings(&self) -> &HttpSettings {
        &self.settings
    }

    fn body(&self, request: &CompletionRequest) -> Value {
        let mut body = json!({
            "model": self.settings.model,
            "max_tokens": request.max_new_tokens,
            "temperature": request.temperature,
        });
        if !request.stop.is_empty() {
            body["stop"] = json!(request.stop);
        }
        match self.settings.api_shape {
            ApiShape::Completions => {
                let prompt = match &request.system {
                    Some(system) => format!("{system}\n\n{}", request.prompt),
                    None => request.prompt.clone(),
                };
                body["prompt"] = json!(prompt);
            }
            ApiShape::Chat => {
                let mut messages = Vec::new();
                if let Some(system) = &request.system {
                    messages.push(json!({"role": "system", "content": system}));
                }
                messages.push(json!({"role": "user", "content": request.prompt}));
                body["messages"] = json!(messages);
            }
        }
        body
    }

    fn send_once(&self, url: &str, body: &Value) -> Result<Value, Attempt> {
        let mut builder = self.client.post(url).json(body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| {
            if e.is_timeout() {
                Attempt::Retryable(BackendError::Timeout)
            } else {
                Attempt::Retryable(BackendError::Transport(e.to_string()))
            }
        })?;
        let status = response.status();
        let text = response.text().map_err(|e| {
            if e.is_timeout() {
                Attempt::Retryable(BackendError::Timeout)
            } else {
                Attempt::Retryable(BackendError::Transport(e.to_string()))
            }
        })?;
        if !status.is_success() {
            let error = BackendError::Http {
                status: status.as_u16(),
                body_excerpt: text.chars().take(BODY_EXCERPT_CHARS).collect(),
            };
            return Err(if status.is_server_error() || status.as_u16() == 429 {
                Attempt::Retryable(error)
            } else {
                Attempt::Fatal(error)
            });
        }
        serde_json::from_str(&text)
            .map_err(|e| Attempt::Fatal(BackendError::InvalidResponse(format!("{e}: {}", excerpt(&text)))))
    }

    fn extract(&self, body: &Value) -> Result<(String, Option<TokenCounts>), BackendError> {
        let choice = body
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| BackendError::InvalidResponse(format!("no choices: {}", excerpt(&body.to_string()))))?;
        let text = match self.settings.api_shape {
            ApiShape::Completions => choice.get("text"),
            ApiShape::Chat => choice.get("message").and_then(|m| m.get("content")),
        }
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
        let tokens = body.get("usage").and_then(|usage| {
            Some(TokenCounts {
                prompt: usage.get("prompt_tokens")?.as_u64()?,
                completion: usage.get("completion_tokens")?.as_u64()?,
            })
        });
        Ok((text, tokens))
    }
}

enum Attempt {
    Retryable(BackendError),
    Fatal(BackendError),
}

fn excerpt(text: &str) -> String {
    text.chars().take(BODY_EXCERPT_CHARS).collect()
}

impl LlmBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let _permit = self.gate.acquire();
        let started = Instant::now();
        let url = self.settings.url();
        let body = self.body(request);
        let mut attempt = 0;
        let value = loop {
            match self.send_once(&url, &body) {
                Ok(value) => break value,
                Err(Attempt::Fatal(error)) => return Err(error),
                Err(Attempt::Retryable(error)) if attempt >= self.settings.max_retries => {
                    warn!("giving up on {url} after {} attempts: {error}", attempt + 1);
                    return Err(error);
                }
                Err(Attempt::Retryable(error)) => {
                    let backoff = Duration::from_millis(self.settings.retry_backoff_ms << attempt.min(16));
                    debug!("attempt {} against {url} failed ({error}); retrying in {backoff:?}", attempt + 1);
                    std::thread::sleep(backoff);
                    attempt += 1;
                }
            }
        };
        let (text, token_counts) = self.extract(&value)?;
        Ok(CompletionResponse {
            text: strip_stop(&text, &request.stop),
            latency: started.elapsed().as_secs_f64(),
            token_counts,
        })
    }
}
