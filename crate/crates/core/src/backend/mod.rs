//! Completion backends: OpenAI-compatible HTTP endpoints and a scripted
//! stand-in for tests.

mod http;
mod scripted;

pub use http::{ApiShape, HttpBackend, HttpSettings};
pub use scripted::{load_script, ScriptBook, ScriptEntry, ScriptError, ScriptedBackend};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("endpoint returned status {status}: {body_excerpt}")]
    Http { status: u16, body_excerpt: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("unexpected response body: {0}")]
    InvalidResponse(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("script exhausted after {calls} calls")]
    ScriptExhausted { calls: usize },
    #[error("script call {call}: prompt does not contain expected substring {expected:?}")]
    ScriptMismatch { call: usize, expected: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    /// Sent as a separate system message by chat-shaped endpoints; prepended
    /// to the prompt otherwise.
    pub system: Option<String>,
    pub stop: Vec<String>,
    pub max_new_tokens: u32,
    pub temperature: f64,
}

impl CompletionRequest {
    pub fn new(
        prompt: impl Into<String>,
        stop: Vec<String>,
        max_new_tokens: u32,
        temperature: f64,
    ) -> Result<Self, BackendError> {
        if max_new_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_new_tokens must be at least 1".into()));
        }
        if temperature.is_nan() || temperature < 0.0 {
            return Err(BackendError::InvalidRequest("temperature must be non-negative".into()));
        }
        Ok(Self { prompt: prompt.into(), system: None, stop, max_new_tokens, temperature })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub prompt: u64,
    pub completion: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResponse {
    /// Generated text, cut before the first stop sequence.
    pub text: String,
    /// Seconds spent in the call, including retries.
    pub latency: f64,
    pub token_counts: Option<TokenCounts>,
}

/// A blocking completion source. Implementations must be callable from
/// several worker threads at once.
pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError>;
}

impl<T: LlmBackend + ?Sized> LlmBackend for std::sync::Arc<T> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        (**self).complete(request)
    }
}

/// Truncates `text` at the earliest occurrence of any stop sequence.
pub fn strip_stop(text: &str, stops: &[String]) -> String {
    let cut = stops
        .iter()
        .filter(|stop| !stop.is_empty())
        .filter_map(|stop| text.find(stop.as_str()))
        .min()
        .unwrap_or(text.len());
    text[..cut].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_echoed_stop_sequence() {
        let stops = vec!["\nObservation".to_string()];
        assert_eq!(strip_stop("foo\nObservation", &stops), "foo");
        assert_eq!(strip_stop("foo\nObservation 1: bar\nObservation", &stops), "foo");
        assert_eq!(strip_stop("plain", &stops), "plain");
    }

    #[test]
    fn earliest_stop_wins() {
        let stops = vec!["BB".to_string(), "A".to_string()];
        assert_eq!(strip_stop("xxBBxA", &stops), "xx");
        assert_eq!(strip_stop("xAxBB", &stops), "x");
    }

    #[test]
    fn request_validation() {
        assert!(CompletionRequest::new("p", vec![], 0, 0.0).is_err());
        assert!(CompletionRequest::new("p", vec![], 1, -0.5).is_err());
        assert!(CompletionRequest::new("p", vec![], 1, f64::NAN).is_err());
        assert!(CompletionRequest::new("p", vec![], 1, 0.0).is_ok());
    }

    proptest! {
        #[test]
        fn stripped_text_never_contains_a_stop(
            text in "[ab\\n]{0,40}",
            stops in prop::collection::vec("[ab\\n]{1,3}", 1..4),
        ) {
            let out = strip_stop(&text, &stops);
            prop_assert!(text.starts_with(&out));
            for stop in &stops {
                prop_assert!(!out.contains(stop.as_str()));
            }
        }
    }
}
