//! Live knowledge source over the MediaWiki action API.

use std::time::Duration;

use log::debug;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{split_sentences, KnowledgeSource, Page, SearchHit, Source, ToolError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WikipediaSettings {
    pub api_url: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub user_agent: String,
}

impl Default for WikipediaSettings {
    fn default() -> Self {
        Self {
            api_url: "https://en.wikipedia.org/w/api.php".into(),
            timeout_secs: 30.0,
            max_retries: 2,
            retry_backoff_ms: 500,
            user_agent: concat!("focused-react/", env!("CARGO_PKG_VERSION")).into(),
        }
    }
}

#[derive(Debug)]
pub struct WikipediaSource {
    client: reqwest::blocking::Client,
    settings: WikipediaSettings,
}

impl WikipediaSource {
    pub fn new(settings: WikipediaSettings) -> Result<Self, ToolError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(settings.timeout_secs.max(0.001)))
            .user_agent(settings.user_agent.clone())
            .build()
            .map_err(|e| ToolError::Transport(e.to_string()))?;
        Ok(Self { client, settings })
    }

    fn get(&self, params: &[(&str, &str)]) -> Result<Value, ToolError> {
        let mut attempt = 0;
        loop {
            let result = self
                .client
                .get(&self.settings.api_url)
                .query(&[("action", "query"), ("format", "json"), ("formatversion", "2")])
                .query(params)
                .send()
                .map_err(|e| ToolError::Transport(e.to_string()))
                .and_then(|response| {
                    let status = response.status();
                    if status.is_success() {
                        response.json::<Value>().map_err(|e| ToolError::InvalidResponse(e.to_string()))
                    } else {
                        Err(ToolError::Http(status.as_u16()))
                    }
                });
            let retryable = match &result {
                Err(ToolError::Transport(_)) => true,
                Err(ToolError::Http(status)) => *status >= 500 || *status == 429,
                _ => false,
            };
            if !retryable || attempt >= self.settings.max_retries {
                return result;
            }
            let backoff = Duration::from_millis(self.settings.retry_backoff_ms << attempt.min(16));
            debug!("wiki request failed ({:?}); retrying in {backoff:?}", result.err());
            std::thread::sleep(backoff);
            attempt += 1;
        }
    }

    fn fetch_page(&self, title: &str) -> Result<Option<Page>, ToolError> {
        let body = self.get(&[("prop", "extracts"), ("explaintext", "1"), ("redirects", "1"), ("titles", title)])?;
        let page =
            body.pointer("/query/pages/0").ok_or_else(|| ToolError::InvalidResponse("missing query.pages".into()))?;
        if page.get("missing").is_some() || page.get("invalid").is_some() {
            return Ok(None);
        }
        let extract = page.get("extract").and_then(Value::as_str).unwrap_or_default();
        let sentences = split_sentences(extract);
        if sentences.is_empty() {
            return Ok(None);
        }
        let title = page.get("title").and_then(Value::as_str).unwrap_or(title).to_string();
        Ok(Some(Page { title, sentences }))
    }

    fn similar_titles(&self, entity: &str) -> Result<Vec<String>, ToolError> {
        let body = self.get(&[("list", "search"), ("srsearch", entity), ("srlimit", "5")])?;
        let hits = body
            .pointer("/query/search")
            .and_then(Value::as_array)
            .ok_or_else(|| ToolError::InvalidResponse("missing query.search".into()))?;
        Ok(hits.iter().filter_map(|hit| hit.get("title").and_then(Value::as_str).map(str::to_string)).collect())
    }
}

impl KnowledgeSource for WikipediaSource {
    /// Exact title first (following redirects); otherwise a full-text search
    /// whose top hit is accepted when it equals the entity ignoring case.
    fn search(&self, entity: &str) -> Result<SearchHit, ToolError> {
        let entity = entity.trim();
        if let Some(page) = self.fetch_page(entity)? {
            return Ok(SearchHit::Found(page));
        }
        let similar = self.similar_titles(entity)?;
        if let Some(top) = similar.first().filter(|t| t.to_lowercase() == entity.to_lowercase()) {
            if let Some(page) = self.fetch_page(top)? {
                return Ok(SearchHit::Found(page));
            }
        }
        Ok(SearchHit::NotFound { similar })
    }

    fn source(&self) -> Source {
        Source::Live
    }
}
