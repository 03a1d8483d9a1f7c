//! Run configuration: one TOML file holding every knob, optional environment
//! overrides, and assembly of the runtime pieces it describes.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, HttpBackend, HttpSettings, LlmBackend, ScriptBook, ScriptError};
use crate::engine::EngineConfig;
use crate::prompting::{FewShotSet, PromptError, PromptPlan, PromptSettings};
use crate::tools::{
    FixtureSource, KnowledgeSource, ObservationCache, ToolError, Toolset, WikipediaSettings, WikipediaSource,
    DEFAULT_SUMMARY_SENTENCES,
};
use crate::trace::TraceDetail;
use crate::transcript::Mode;

pub const ENV_BACKEND: &str = "FOCUSED_REACT_BACKEND";
pub const ENV_ENDPOINT: &str = "FOCUSED_REACT_ENDPOINT";
pub const ENV_MODEL: &str = "FOCUSED_REACT_MODEL";
pub const ENV_MAX_ROUNDS: &str = "FOCUSED_REACT_MAX_ROUNDS";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid value for {name}: {value}")]
    InvalidValue { name: String, value: String },
    #[error("{0}")]
    Missing(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Tool(#[from] ToolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub http: HttpSettings,
    pub script: Option<PathBuf>,
    pub scripted_latency_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self { kind: BackendKind::Http, http: HttpSettings::default(), script: None, scripted_latency_ms: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToolSourceKind {
    Wikipedia,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub source: ToolSourceKind,
    pub fixture: Option<PathBuf>,
    /// Share search results across episodes of a run.
    pub cache: bool,
    /// Where the cache is loaded from and saved to; in-memory when unset.
    pub cache_path: Option<PathBuf>,
    pub summary_sentences: usize,
    pub wikipedia: WikipediaSettings,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            source: ToolSourceKind::Wikipedia,
            fixture: None,
            cache: true,
            cache_path: None,
            summary_sentences: DEFAULT_SUMMARY_SENTENCES,
            wikipedia: WikipediaSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSettings {
    pub n: usize,
    pub seed: u64,
    pub modes: Vec<Mode>,
    pub concurrency: usize,
    pub trace_detail: TraceDetail,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            n: 150,
            seed: 0,
            modes: vec![Mode::Vanilla, Mode::Focused],
            concurrency: 1,
            trace_detail: TraceDetail::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Few-shot file; the built-in set is used when unset.
    pub fewshot_path: Option<PathBuf>,
    pub backend: BackendConfig,
    pub prompts: PromptSettings,
    pub engine: EngineConfig,
    pub tools: ToolConfig,
    pub bench: BenchSettings,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut config = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let paths =
            [&mut self.fewshot_path, &mut self.backend.script, &mut self.tools.fixture, &mut self.tools.cache_path];
        for path in paths.into_iter().flatten() {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Applies `FOCUSED_REACT_*` overrides read through `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        let invalid = |name: &str, value: &str| ConfigError::InvalidValue { name: name.into(), value: value.into() };
        if let Some(value) = lookup(ENV_BACKEND) {
            self.backend.kind = match value.as_str() {
                "http" => BackendKind::Http,
                "scripted" => BackendKind::Scripted,
                _ => return Err(invalid(ENV_BACKEND, &value)),
            };
        }
        if let Some(value) = lookup(ENV_ENDPOINT) {
            self.backend.http.endpoint = value;
        }
        if let Some(value) = lookup(ENV_MODEL) {
            self.backend.http.model = value;
        }
        if let Some(value) = lookup(ENV_MAX_ROUNDS) {
            self.engine.max_rounds = value.parse().map_err(|_| invalid(ENV_MAX_ROUNDS, &value))?;
        }
        Ok(())
    }

    /// Checks everything that can be checked without touching the network.
    pub fn validate(&self) -> Result<(), ConfigError> {
        PromptPlan::new(Mode::Focused, self.prompts.clone())?;
        if self.engine.max_rounds == 0 {
            return Err(ConfigError::InvalidValue { name: "engine.max_rounds".into(), value: "0".into() });
        }
        Ok(())
    }
}

/// Hands each episode its own backend.
pub enum BackendProvider {
    Http(Arc<HttpBackend>),
    Scripted(ScriptBook),
}

impl BackendProvider {
    pub fn for_episode(&self, task_id: &str, mode: Mode) -> Box<dyn LlmBackend> {
        match self {
            BackendProvider::Http(backend) => Box::new(backend.clone()),
            BackendProvider::Scripted(book) => Box::new(book.backend_for(task_id, mode)),
        }
    }
}

/// Builds per-episode toolsets over one shared source and cache.
pub struct ToolProvider {
    source: Arc<dyn KnowledgeSource>,
    cache: Option<Arc<ObservationCache>>,
    cache_path: Option<PathBuf>,
    summary_sentences: usize,
}

impl ToolProvider {
    pub fn new(source: Arc<dyn KnowledgeSource>, cache: Option<Arc<ObservationCache>>) -> Self {
        Self { source, cache, cache_path: None, summary_sentences: DEFAULT_SUMMARY_SENTENCES }
    }

    pub fn toolset(&self) -> Toolset {
        Toolset::new(self.source.clone(), self.cache.clone()).with_summary_sentences(self.summary_sentences)
    }

    pub fn persist_cache(&self) -> Result<usize, ToolError> {
        match (&self.cache, &self.cache_path) {
            (Some(cache), Some(path)) => cache.save(path),
            _ => Ok(0),
        }
    }
}

/// Everything an episode needs, assembled from a [`RunConfig`].
pub struct Runtime {
    pub backends: BackendProvider,
    pub tools: ToolProvider,
    pub fewshot: FewShotSet,
    pub prompts: PromptSettings,
    pub engine: EngineConfig,
}

impl Runtime {
    pub fn from_config(config: &RunConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let backends = match config.backend.kind {
            BackendKind::Http => BackendProvider::Http(Arc::new(HttpBackend::new(config.backend.http.clone())?)),
            BackendKind::Scripted => {
                let path = config
                    .backend
                    .script
                    .as_ref()
                    .ok_or_else(|| ConfigError::Missing("the scripted backend needs a script file".into()))?;
                let latency = Duration::from_millis(config.backend.scripted_latency_ms);
                BackendProvider::Scripted(ScriptBook::load(path)?.with_latency(latency))
            }
        };
        let source: Arc<dyn KnowledgeSource> = match config.tools.source {
            ToolSourceKind::Wikipedia => Arc::new(WikipediaSource::new(config.tools.wikipedia.clone())?),
            ToolSourceKind::Fixture => {
                let path = config
                    .tools
                    .fixture
                    .as_ref()
                    .ok_or_else(|| ConfigError::Missing("the fixture tool source needs a fixture file".into()))?;
                Arc::new(FixtureSource::load(path)?)
            }
        };
        let cache = if config.tools.cache {
            let cache = match &config.tools.cache_path {
                Some(path) => ObservationCache::load(path)?,
                None => ObservationCache::default(),
            };
            Some(Arc::new(cache))
        } else {
            None
        };
        let tools = ToolProvider {
            source,
            cache,
            cache_path: config.tools.cache_path.clone().filter(|_| config.tools.cache),
            summary_sentences: config.tools.summary_sentences,
        };
        let fewshot = match &config.fewshot_path {
            Some(path) => FewShotSet::load(path)?,
            None => FewShotSet::default(),
        };
        Ok(Self { backends, tools, fewshot, prompts: config.prompts.clone(), engine: config.engine.clone() })
    }
}
