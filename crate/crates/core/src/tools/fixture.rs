//! Recorded tool responses and the shared search cache. Both use the same
//! line-delimited record format.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{
    render_search, search_key, KnowledgeSource, Page, SearchHit, Source, ToolError, Toolset, SEARCH_FAILED_OBSERVATION,
};
use crate::transcript::{Action, ActionName, NormalizedActionKey};

/// One fixture line. `page` or `similar` carry the search result so that
/// replay restores the environment state, not just the observation text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub key_name: String,
    pub key_arg: String,
    pub observation: String,
    /// Unix seconds.
    pub recorded_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page: Option<Page>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similar: Option<Vec<String>>,
    /// Set when recording failed; replaying such an entry fails the search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or_default()
}

impl FixtureEntry {
    pub fn from_hit(key: &NormalizedActionKey, hit: &SearchHit, observation: String) -> Self {
        let (page, similar) = match hit {
            SearchHit::Found(page) => (Some(page.clone()), None),
            SearchHit::NotFound { similar } => (None, Some(similar.clone())),
        };
        Self {
            key_name: key.name.clone(),
            key_arg: key.argument.clone(),
            observation,
            recorded_at: now_unix(),
            page,
            similar,
            error: None,
        }
    }

    pub fn observation_only(key: &NormalizedActionKey, observation: String) -> Self {
        Self {
            key_name: key.name.clone(),
            key_arg: key.argument.clone(),
            observation,
            recorded_at: now_unix(),
            page: None,
            similar: None,
            error: None,
        }
    }

    pub fn failed(key: &NormalizedActionKey, error: String) -> Self {
        Self { error: Some(error), ..Self::observation_only(key, SEARCH_FAILED_OBSERVATION.into()) }
    }

    pub fn key(&self) -> NormalizedActionKey {
        NormalizedActionKey::new(&self.key_name, &self.key_arg)
    }

    pub fn hit(&self) -> Option<SearchHit> {
        match (&self.page, &self.similar) {
            (Some(page), _) => Some(SearchHit::Found(page.clone())),
            (None, Some(similar)) => Some(SearchHit::NotFound { similar: similar.clone() }),
            (None, None) => None,
        }
    }
}

pub fn read_fixture(path: &Path) -> Result<Vec<FixtureEntry>, ToolError> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::Io(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| ToolError::FixtureFormat { line: i + 1, message: e.to_string() })
        })
        .collect()
}

pub fn write_fixture<'a>(path: &Path, entries: impl IntoIterator<Item = &'a FixtureEntry>) -> Result<usize, ToolError> {
    let io = |e: std::io::Error| ToolError::Io(format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let mut out = BufWriter::new(fs::File::create(path).map_err(io)?);
    let mut count = 0;
    for entry in entries {
        let line = serde_json::to_string(entry).map_err(|e| ToolError::Io(e.to_string()))?;
        writeln!(out, "{line}").map_err(io)?;
        count += 1;
    }
    out.flush().map_err(io)?;
    Ok(count)
}

/// Offline knowledge source backed by recorded search results.
#[derive(Debug, Default)]
pub struct FixtureSource {
    entries: IndexMap<NormalizedActionKey, FixtureEntry>,
}

impl FixtureSource {
    pub fn from_entries(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        let entries = entries.into_iter().filter(|e| e.key_name == "search").map(|e| (e.key(), e)).collect();
        Self { entries }
    }

    pub fn load(path: &Path) -> Result<Self, ToolError> {
        Ok(Self::from_entries(read_fixture(path)?))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl KnowledgeSource for FixtureSource {
    fn search(&self, entity: &str) -> Result<SearchHit, ToolError> {
        let key = search_key(entity);
        let Some(entry) = self.entries.get(&key) else {
            return Err(ToolError::FixtureMiss(key));
        };
        if let Some(message) = &entry.error {
            return Err(ToolError::RecordedError { key, message: message.clone() });
        }
        entry.hit().ok_or_else(|| ToolError::FixtureFormat {
            line: 0,
            message: format!("entry {key} has neither page nor similar titles"),
        })
    }

    fn source(&self) -> Source {
        Source::Fixture
    }
}

/// Search results shared across concurrent episodes, keyed by normalized
/// action key. Identical keys always map to identical values, so concurrent
/// writers may overwrite each other freely.
#[derive(Debug, Default)]
pub struct ObservationCache {
    entries: RwLock<IndexMap<NormalizedActionKey, FixtureEntry>>,
}

impl ObservationCache {
    /// Loads a persisted cache; a missing file yields an empty cache.
    pub fn load(path: &Path) -> Result<Self, ToolError> {
        if !path.exists() {
            return Ok(Self::default());
        }
        let entries = read_fixture(path)?
            .into_iter()
            .filter(|e| e.error.is_none() && e.hit().is_some())
            .map(|e| (e.key(), e))
            .collect();
        Ok(Self { entries: RwLock::new(entries) })
    }

    pub fn get(&self, key: &NormalizedActionKey) -> Option<SearchHit> {
        self.entries.read().expect("cache poisoned").get(key).and_then(FixtureEntry::hit)
    }

    pub fn insert(&self, key: &NormalizedActionKey, hit: &SearchHit, observation: String) {
        let entry = FixtureEntry::from_hit(key, hit, observation);
        self.entries.write().expect("cache poisoned").insert(key.clone(), entry);
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn save(&self, path: &Path) -> Result<usize, ToolError> {
        let entries = self.entries.read().expect("cache poisoned");
        write_fixture(path, entries.values())
    }
}

/// Runs `actions` in order against `source` and writes one fixture entry per
/// distinct normalized key. Failed searches are written with an error marker.
/// `Finish` actions are skipped.
pub fn record_fixture(
    source: Arc<dyn KnowledgeSource>,
    actions: &[Action],
    destination: &Path,
    summary_sentences: usize,
) -> Result<usize, ToolError> {
    let mut tools = Toolset::new(source.clone(), None);
    let mut entries: IndexMap<NormalizedActionKey, FixtureEntry> = IndexMap::new();
    for action in actions {
        let key = action.key();
        let entry = match action.name() {
            ActionName::Finish => continue,
            ActionName::Lookup => FixtureEntry::observation_only(&key, tools.lookup(action.argument()).observation),
            ActionName::Search => match source.search(action.argument()) {
                Ok(hit) => {
                    let observation = render_search(action.argument(), &hit, summary_sentences.max(1));
                    if let SearchHit::Found(page) = &hit {
                        tools.state.set_page(page.clone());
                    }
                    FixtureEntry::from_hit(&key, &hit, observation)
                }
                Err(error) => FixtureEntry::failed(&key, error.to_string()),
            },
        };
        entries.insert(key, entry);
    }
    write_fixture(destination, entries.values())
}
