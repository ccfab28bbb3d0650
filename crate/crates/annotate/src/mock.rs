//! Offline replay backend. Fixtures pair a template id with a prompt
//! keyword; the first match in file order supplies the canned reply, so a
//! fixture file is a tiny decision table over the prompts a run will send.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::client::{ChatBackend, ChatRequest};
use crate::error::AnnotateError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    /// Template id the fixture answers, e.g. "articulation_v1".
    pub template: String,
    /// Case-insensitive substring the prompt must contain. Empty matches
    /// every prompt for the template.
    #[serde(rename = "match", default)]
    pub match_keyword: String,
    /// Reply payload: a string is returned verbatim, any other JSON value
    /// is serialized compactly.
    pub reply: Value,
}

impl Fixture {
    fn matches(&self, request: &ChatRequest) -> bool {
        if self.template != request.template_id {
            return false;
        }
        if self.match_keyword.is_empty() {
            return true;
        }
        request
            .prompt
            .to_lowercase()
            .contains(&self.match_keyword.to_lowercase())
    }

    fn reply_text(&self) -> String {
        match &self.reply {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
}

pub struct MockBackend {
    fixtures: Vec<Fixture>,
}

impl MockBackend {
    pub fn new(fixtures: Vec<Fixture>) -> Self {
        Self { fixtures }
    }

    pub fn from_json_str(text: &str) -> Result<Self, AnnotateError> {
        let fixtures: Vec<Fixture> =
            serde_json::from_str(text).map_err(|e| AnnotateError::BadReply {
                reason: format!("fixture file is not a fixture array: {e}"),
            })?;
        Ok(Self::new(fixtures))
    }

    pub fn from_path(path: &Path) -> Result<Self, AnnotateError> {
        let text = std::fs::read_to_string(path).map_err(|e| AnnotateError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json_str(&text)
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, AnnotateError> {
        self.fixtures
            .iter()
            .find(|f| f.matches(request))
            .map(Fixture::reply_text)
            .ok_or_else(|| AnnotateError::NoFixture {
                template: request.template_id.to_string(),
            })
    }
}
