//! The Search/Lookup environment.
//!
//! `Search` goes to a [`KnowledgeSource`] (live MediaWiki or a recorded
//! fixture), optionally through a shared [`ObservationCache`]. `Lookup` is
//! evaluated locally against the page loaded by the last successful search.

mod fixture;
mod sentences;
mod wikipedia;

pub use fixture::{read_fixture, record_fixture, write_fixture, FixtureEntry, FixtureSource, ObservationCache};
pub use sentences::split_sentences;
pub use wikipedia::{WikipediaSettings, WikipediaSource};

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::{Action, ActionName, NormalizedActionKey};

pub const DEFAULT_SUMMARY_SENTENCES: usize = 5;
pub const SEARCH_FAILED_OBSERVATION: &str = "Search failed: temporary error.";
pub const NO_PAGE_OBSERVATION: &str = "No page is currently loaded. Search first.";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToolError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("knowledge source returned status {0}")]
    Http(u16),
    #[error("unexpected response: {0}")]
    InvalidResponse(String),
    #[error("no fixture entry for {0}")]
    FixtureMiss(NormalizedActionKey),
    #[error("fixture entry for {key} recorded an error: {message}")]
    RecordedError { key: NormalizedActionKey, message: String },
    #[error("`{0}` is not a tool action")]
    NotATool(ActionName),
    #[error("fixture I/O: {0}")]
    Io(String),
    #[error("fixture format error at line {line}: {message}")]
    FixtureFormat { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub title: String,
    pub sentences: Vec<String>,
}

/// What a knowledge source knows about an entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchHit {
    Found(Page),
    NotFound { similar: Vec<String> },
}

pub trait KnowledgeSource: Send + Sync {
    fn search(&self, entity: &str) -> Result<SearchHit, ToolError>;

    fn source(&self) -> Source;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Live,
    Fixture,
    Cache,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolResponse {
    pub observation: String,
    /// Seconds.
    pub latency: f64,
    pub source: Source,
}

/// Per-episode environment state. Cursors are keyed by lowercased keyword
/// and are cleared whenever the page changes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ToolState {
    current_page: Option<Page>,
    lookup_cursor: HashMap<String, usize>,
}

impl ToolState {
    pub fn current_page(&self) -> Option<&Page> {
        self.current_page.as_ref()
    }

    pub fn set_page(&mut self, page: Page) {
        self.current_page = Some(page);
        self.lookup_cursor.clear();
    }
}

pub fn search_key(entity: &str) -> NormalizedActionKey {
    NormalizedActionKey::new("search", entity)
}

/// Observation text for a search result.
pub fn render_search(entity: &str, hit: &SearchHit, summary_sentences: usize) -> String {
    match hit {
        SearchHit::Found(page) => {
            let n = summary_sentences.max(1).min(page.sentences.len());
            page.sentences[..n].join(" ")
        }
        SearchHit::NotFound { similar } => {
            let similar: Vec<&str> = similar.iter().take(5).map(String::as_str).collect();
            format!("Could not find [{}]. Similar: [{}].", entity.trim(), similar.join(", "))
        }
    }
}

/// Returns the next sentence of the current page containing `keyword`
/// (case-insensitive) and advances that keyword's cursor.
pub fn lookup(keyword: &str, state: &mut ToolState) -> String {
    let Some(page) = &state.current_page else {
        return NO_PAGE_OBSERVATION.to_string();
    };
    let needle = keyword.trim().to_lowercase();
    let matches: Vec<&String> = page.sentences.iter().filter(|s| s.to_lowercase().contains(&needle)).collect();
    let cursor = state.lookup_cursor.entry(needle).or_insert(0);
    match matches.get(*cursor) {
        Some(sentence) => {
            *cursor += 1;
            format!("(Result {}/{}) {}", *cursor, matches.len(), sentence)
        }
        None => format!("No more results for [{}].", keyword.trim()),
    }
}

/// One episode's view of the environment.
pub struct Toolset {
    source: Arc<dyn KnowledgeSource>,
    cache: Option<Arc<ObservationCache>>,
    state: ToolState,
    summary_sentences: usize,
    calls: usize,
}

impl Toolset {
    pub fn new(source: Arc<dyn KnowledgeSource>, cache: Option<Arc<ObservationCache>>) -> Self {
        Self { source, cache, state: ToolState::default(), summary_sentences: DEFAULT_SUMMARY_SENTENCES, calls: 0 }
    }

    pub fn with_summary_sentences(mut self, n: usize) -> Self {
        self.summary_sentences = n.max(1);
        self
    }

    pub fn state(&self) -> &ToolState {
        &self.state
    }

    /// Number of Search/Lookup executions, including failed ones.
    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn search(&mut self, entity: &str) -> Result<ToolResponse, ToolError> {
        let started = Instant::now();
        let key = search_key(entity);
        let cached = self.cache.as_ref().and_then(|cache| cache.get(&key));
        let (hit, source) = match cached {
            Some(hit) => (hit, Source::Cache),
            None => {
                let hit = self.source.search(entity)?;
                if let Some(cache) = &self.cache {
                    cache.insert(&key, &hit, render_search(entity, &hit, self.summary_sentences));
                }
                (hit, self.source.source())
            }
        };
        let observation = render_search(entity, &hit, self.summary_sentences);
        if let SearchHit::Found(page) = hit {
            self.state.set_page(page);
        }
        Ok(ToolResponse { observation, latency: started.elapsed().as_secs_f64(), source })
    }

    pub fn lookup(&mut self, keyword: &str) -> ToolResponse {
        let started = Instant::now();
        let observation = lookup(keyword, &mut self.state);
        let source = match self.source.source() {
            Source::Fixture => Source::Fixture,
            _ => Source::Live,
        };
        ToolResponse { observation, latency: started.elapsed().as_secs_f64(), source }
    }

    pub fn execute(&mut self, action: &Action) -> Result<ToolResponse, ToolError> {
        if action.name() != ActionName::Finish {
            self.calls += 1;
        }
        match action.name() {
            ActionName::Search => self.search(action.argument()),
            ActionName::Lookup => Ok(self.lookup(action.argument())),
            ActionName::Finish => Err(ToolError::NotATool(ActionName::Finish)),
        }
    }
}
