use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{strip_stop, BackendError, CompletionRequest, CompletionResponse, LlmBackend};
use crate::transcript::Mode;

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("failed to read script {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("script format error at line {line}: {message}")]
    FixtureFormat { line: usize, message: String },
}

/// One canned generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_prompt_substring: Option<String>,
    /// Restricts the entry to one episode: either `<task id>` or
    /// `<task id>/<mode>`. Unkeyed entries form the default script.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode: Option<String>,
}

impl ScriptEntry {
    pub fn new(response: impl Into<String>) -> Self {
        Self { response: response.into(), expected_prompt_substring: None, episode: None }
    }

    pub fn expecting(mut self, substring: impl Into<String>) -> Self {
        self.expected_prompt_substring = Some(substring.into());
        self
    }
}

/// Replays canned responses in order. One instance serves one episode.
#[derive(Debug)]
pub struct ScriptedBackend {
    queue: Mutex<VecDeque<ScriptEntry>>,
    latency: Duration,
    calls: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new(entries: impl IntoIterator<Item = ScriptEntry>) -> Self {
        Self { queue: Mutex::new(entries.into_iter().collect()), latency: Duration::ZERO, calls: AtomicUsize::new(0) }
    }

    pub fn from_responses<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self::new(responses.into_iter().map(ScriptEntry::new))
    }

    /// Each call blocks for `latency` and reports exactly that value.
    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().expect("script queue poisoned").len()
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let started = Instant::now();
        let entry = self.queue.lock().expect("script queue poisoned").pop_front();
        let call = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
        let Some(entry) = entry else {
            return Err(BackendError::ScriptExhausted { calls: call - 1 });
        };
        if let Some(expected) = entry.expected_prompt_substring {
            if !request.prompt.contains(&expected) {
                return Err(BackendError::ScriptMismatch { call, expected });
            }
        }
        if !self.latency.is_zero() {
            std::thread::sleep(self.latency.saturating_sub(started.elapsed()));
        }
        Ok(CompletionResponse {
            text: strip_stop(&entry.response, &request.stop),
            latency: self.latency.as_secs_f64(),
            token_counts: None,
        })
    }
}

fn parse_entries(text: &str) -> Result<Vec<ScriptEntry>, ScriptError> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text)
            .map_err(|e| ScriptError::FixtureFormat { line: e.line(), message: e.to_string() });
    }
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| ScriptError::FixtureFormat { line: i + 1, message: e.to_string() })
        })
        .collect()
}

fn read_entries(path: &Path) -> Result<Vec<ScriptEntry>, ScriptError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ScriptError::Io { path: path.display().to_string(), source })?;
    parse_entries(&text)
}

/// Loads a script file: either a JSON array of entries or one JSON object per
/// line. An empty file is a valid, empty script.
pub fn load_script(path: &Path) -> Result<ScriptedBackend, ScriptError> {
    Ok(ScriptedBackend::new(read_entries(path)?))
}

/// A script file shared across many episodes. Every episode gets a fresh
/// backend, so concurrent episodes never contend for one queue.
#[derive(Debug, Clone, Default)]
pub struct ScriptBook {
    keyed: HashMap<String, Vec<ScriptEntry>>,
    default: Vec<ScriptEntry>,
    latency: Duration,
}

impl ScriptBook {
    pub fn new(entries: Vec<ScriptEntry>) -> Self {
        let mut book = Self::default();
        for entry in entries {
            match &entry.episode {
                Some(key) => book.keyed.entry(key.clone()).or_default().push(entry),
                None => book.default.push(entry),
            }
        }
        book
    }

    pub fn load(path: &Path) -> Result<Self, ScriptError> {
        Ok(Self::new(read_entries(path)?))
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    /// Entries for `<task>/<mode>`, else `<task>`, else the unkeyed script.
    pub fn backend_for(&self, task_id: &str, mode: Mode) -> ScriptedBackend {
        let entries =
            self.keyed.get(&format!("{task_id}/{mode}")).or_else(|| self.keyed.get(task_id)).unwrap_or(&self.default);
        ScriptedBackend::new(entries.iter().cloned()).with_latency(self.latency)
    }
}
