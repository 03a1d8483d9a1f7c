//! Line-delimited episode traces and failure analysis over them.
//!
//! Each line is a JSON object `{"schema_version": 1, "episode": {...}}`; the
//! layout is described by `docs/trace-schema-v1.json`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::{Episode, NormalizedActionKey, Termination};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: unsupported trace schema version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { line: usize, found: u64 },
    #[error("line {line}: cannot parse trace record: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub schema_version: u32,
    pub episode: Episode,
}

/// How much prompt text to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceDetail {
    #[default]
    Full,
    /// Prompts are dropped; their digests remain.
    Slim,
}

fn prepare(episode: &Episode, detail: TraceDetail) -> Episode {
    let mut episode = episode.clone();
    if detail == TraceDetail::Slim {
        for step in &mut episode.steps {
            step.prompt = None;
        }
        if let Some(forced) = &mut episode.forced_answer {
            forced.prompt = None;
        }
    }
    episode
}

/// Append-only trace writer.
pub struct TraceWriter {
    path: PathBuf,
    out: BufWriter<File>,
    detail: TraceDetail,
    written: usize,
}

impl TraceWriter {
    pub fn create(path: &Path, detail: TraceDetail) -> Result<Self, TraceError> {
        let io = |source| TraceError::Io { path: path.to_path_buf(), source };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(io)?;
        }
        let file = File::create(path).map_err(io)?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file), detail, written: 0 })
    }

    pub fn append(&mut self, episode: &Episode) -> Result<(), TraceError> {
        let record = TraceRecord { schema_version: SCHEMA_VERSION, episode: prepare(episode, self.detail) };
        let line = serde_json::to_string(&record)
            .map_err(|e| TraceError::InvalidInput(format!("episode {} is not serializable: {e}", episode.id)))?;
        writeln!(self.out, "{line}").map_err(|source| TraceError::Io { path: self.path.clone(), source })?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<usize, TraceError> {
        self.out.flush().map_err(|source| TraceError::Io { path: self.path.clone(), source })?;
        Ok(self.written)
    }
}

pub fn save_episodes(episodes: &[Episode], path: &Path, detail: TraceDetail) -> Result<usize, TraceError> {
    let mut writer = TraceWriter::create(path, detail)?;
    for episode in episodes {
        writer.append(episode)?;
    }
    writer.finish()
}

pub fn load_episodes(path: &Path) -> Result<Vec<Episode>, TraceError> {
    let text = fs::read_to_string(path).map_err(|source| TraceError::Io { path: path.to_path_buf(), source })?;
    parse_trace(&text)
}

pub fn parse_trace(text: &str) -> Result<Vec<Episode>, TraceError> {
    let mut episodes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |message: String| TraceError::Parse { line: line_no, message };
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| parse(e.to_string()))?;
        let version = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| parse("missing schema_version".into()))?;
        if version != u64::from(SCHEMA_VERSION) {
            return Err(TraceError::SchemaVersion { line: line_no, found: version });
        }
        let record: TraceRecord = serde_json::from_value(value).map_err(|e| parse(e.to_string()))?;
        episodes.push(record.episode);
    }
    Ok(episodes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopGroup {
    pub key: NormalizedActionKey,
    /// Step indices, ascending.
    pub occurrence_indices: Vec<u32>,
}

/// Groups well-formed non-Finish actions by normalized key and returns every
/// key seen at least twice, ordered by first occurrence.
pub fn detect_action_loops(episode: &Episode) -> Vec<LoopGroup> {
    let mut groups: IndexMap<NormalizedActionKey, Vec<u32>> = IndexMap::new();
    for (index, action) in episode.tool_actions() {
        groups.entry(action.key()).or_default().push(index);
    }
    groups
        .into_iter()
        .filter(|(_, indices)| indices.len() >= 2)
        .map(|(key, occurrence_indices)| LoopGroup { key, occurrence_indices })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSummary {
    pub episodes: usize,
    pub loop_rate: f64,
    pub cap_rate: f64,
    pub malformed_rate: f64,
    pub early_stop_rate: f64,
    /// Number of steps → number of episodes.
    pub step_histogram: BTreeMap<usize, usize>,
}

pub fn summarize_failures(episodes: &[Episode]) -> Result<FailureSummary, TraceError> {
    if episodes.is_empty() {
        return Err(TraceError::InvalidInput("no episodes to summarize".into()));
    }
    let n = episodes.len() as f64;
    let rate = |pred: &dyn Fn(&Episode) -> bool| episodes.iter().filter(|e| pred(e)).count() as f64 / n;
    let mut step_histogram = BTreeMap::new();
    for episode in episodes {
        *step_histogram.entry(episode.steps.len()).or_insert(0) += 1;
    }
    Ok(FailureSummary {
        episodes: episodes.len(),
        loop_rate: rate(&|e| !detect_action_loops(e).is_empty()),
        cap_rate: rate(&|e| e.termination == Termination::StepCapReached),
        malformed_rate: rate(&|e| e.has_malformed_step()),
        early_stop_rate: rate(&|e| e.termination == Termination::EarlyStopForced),
        step_histogram,
    })
}
