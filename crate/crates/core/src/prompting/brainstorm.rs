use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexicon::{sample_styles, StyleLexicon};
use crate::hash::{counter_u64, fnv1a64};

/// Subject-suggestion request sent to the text-completion backend.
pub const BRAINSTORM_TEMPLATE: &str =
    "In less than 5 words, describe an image for the following words {DESCRIPTION}.";
pub const MAX_SUBJECT_WORDS: usize = 5;
const SUBJECT_COUNT: usize = 3;

pub const LLM_URL_ENV: &str = "DISCO_LLM_URL";
pub const LLM_KEY_ENV: &str = "DISCO_LLM_KEY";
pub const LLM_MODEL_ENV: &str = "DISCO_LLM_MODEL";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BrainstormError {
    #[error("description is empty")]
    EmptyDescription,
    #[error("text backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("could not extract {SUBJECT_COUNT} suggestions from response: {0:?}")]
    UnparseableResponse(String),
    #[error("invalid style lexicon: {0}")]
    InvalidLexicon(String),
    #[error("cannot sample {0} styles")]
    InvalidSampleSize(usize),
}

/// A blocking text-completion backend.
pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, BrainstormError>;
}

impl<T: LlmClient + ?Sized> LlmClient for Box<T> {
    fn complete(&self, prompt: &str) -> Result<String, BrainstormError> {
        (**self).complete(prompt)
    }
}

impl<T: LlmClient + ?Sized> LlmClient for std::sync::Arc<T> {
    fn complete(&self, prompt: &str) -> Result<String, BrainstormError> {
        (**self).complete(prompt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrainstormResult {
    pub subjects: Vec<String>,
    pub styles: Vec<String>,
}

pub fn brainstorm_prompt(description: &str) -> String {
    BRAINSTORM_TEMPLATE.replace("{DESCRIPTION}", description.trim())
}

/// Ask the backend for three short subject ideas.
pub fn brainstorm_subjects(description: &str, client: &dyn LlmClient) -> Result<Vec<String>, BrainstormError> {
    if description.trim().is_empty() {
        return Err(BrainstormError::EmptyDescription);
    }
    let response = client.complete(&brainstorm_prompt(description))?;
    parse_suggestions(&response)
}

/// Subjects from the backend plus `n_styles` sampled style keywords.
pub fn brainstorm<R: Rng + ?Sized>(
    description: &str,
    client: &dyn LlmClient,
    lexicon: &StyleLexicon,
    n_styles: usize,
    rng: &mut R,
) -> Result<BrainstormResult, BrainstormError> {
    let subjects = brainstorm_subjects(description, client)?;
    let styles = sample_styles(lexicon, n_styles, rng)?;
    Ok(BrainstormResult { subjects, styles })
}

/// Lenient list parsing: numbered items, bullets or bare lines.
///
/// Takes the first three items and keeps at most five words of each.
pub fn parse_suggestions(response: &str) -> Result<Vec<String>, BrainstormError> {
    let mut items: Vec<String> = response
        .lines()
        .flat_map(split_inline_numbering)
        .map(|s| clean_item(&s))
        .filter(|s| !s.is_empty())
        .collect();
    if items.len() < SUBJECT_COUNT {
        return Err(BrainstormError::UnparseableResponse(response.to_owned()));
    }
    items.truncate(SUBJECT_COUNT);
    Ok(items
        .into_iter()
        .map(|s| s.split_whitespace().take(MAX_SUBJECT_WORDS).collect::<Vec<_>>().join(" "))
        .collect())
}

/// Split "1. a 2. b 3. c" style single-line lists.
fn split_inline_numbering(line: &str) -> Vec<String> {
    let bytes = line.as_bytes();
    let mut cuts = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let at_boundary = i == 0 || bytes[i - 1] == b' ';
        if at_boundary && bytes[i].is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j < bytes.len() && (bytes[j] == b'.' || bytes[j] == b')') && (j + 1 == bytes.len() || bytes[j + 1] == b' ') {
                cuts.push((i, j + 1));
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    if cuts.len() < 2 {
        return vec![line.to_owned()];
    }
    let mut out = Vec::new();
    if cuts[0].0 > 0 {
        out.push(line[..cuts[0].0].to_owned());
    }
    for (n, &(_, body_start)) in cuts.iter().enumerate() {
        let end = cuts.get(n + 1).map_or(line.len(), |c| c.0);
        out.push(line[body_start..end].to_owned());
    }
    out
}

fn clean_item(raw: &str) -> String {
    let mut s = raw.trim();
    // Leading numbering like "1." or "2)".
    let digits = s.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 && s[digits..].starts_with(['.', ')', ':']) {
        s = &s[digits + 1..];
    }
    s = s.trim_start_matches(['-', '*', '•', ' ']);
    s.trim()
        .trim_matches(|c| matches!(c, '"' | '\'' | '“' | '”'))
        .trim_end_matches('.')
        .trim()
        .to_owned()
}

/// Offline stand-in: a canned triple keyed by a hash of the request.
#[derive(Debug, Clone, Default)]
pub struct StubLlmClient;

const STUB_MODIFIERS: [&str; 12] = [
    "Neon", "Groovy", "Colorful", "Dreamy", "Shimmering", "Retro", "Glowing", "Misty", "Electric", "Golden",
    "Cosmic", "Velvet",
];
const STUB_SUBJECTS: [&str; 12] = [
    "dancers", "robots", "city lights", "disco ball", "ocean waves", "forest spirits", "mountain peaks",
    "street musicians", "paper lanterns", "starry sky", "flower fields", "neon signs",
];
const STUB_SETTINGS: [&str; 8] = [
    "dance floor", "at dusk", "in motion", "under stars", "on stage", "in fog", "over water", "in rain",
];

impl LlmClient for StubLlmClient {
    fn complete(&self, prompt: &str) -> Result<String, BrainstormError> {
        let key = fnv1a64(prompt.as_bytes());
        let lines: Vec<String> = (0..SUBJECT_COUNT as u64)
            .map(|i| {
                let m = STUB_MODIFIERS[(counter_u64(key, 3 * i) % 12) as usize];
                let s = STUB_SUBJECTS[(counter_u64(key, 3 * i + 1) % 12) as usize];
                let t = STUB_SETTINGS[(counter_u64(key, 3 * i + 2) % 8) as usize];
                format!("{}. {m} {s}, {t}", i + 1)
            })
            .collect();
        Ok(lines.join("\n"))
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// `POST {model, prompt}` to an HTTP endpoint that answers `{text}`.
#[derive(Debug, Clone)]
pub struct HttpLlmClient {
    url: String,
    api_key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

impl HttpLlmClient {
    pub fn new(url: impl Into<String>, api_key: Option<String>, model: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Self {
            url: url.into(),
            api_key,
            model: model.into(),
            agent,
        }
    }
}

impl LlmClient for HttpLlmClient {
    fn complete(&self, prompt: &str) -> Result<String, BrainstormError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(CompletionRequest {
                model: &self.model,
                prompt,
            })
            .map_err(|e| BrainstormError::BackendUnavailable(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(BrainstormError::BackendUnavailable(format!("HTTP {status}: {body}")));
        }
        let parsed: CompletionResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| BrainstormError::UnparseableResponse(e.to_string()))?;
        Ok(parsed.text)
    }
}

/// HTTP client when `DISCO_LLM_URL` is set, otherwise the stub.
pub fn llm_client_from_env(timeout: Duration) -> Box<dyn LlmClient> {
    match std::env::var(LLM_URL_ENV) {
        Ok(url) if !url.trim().is_empty() => Box::new(HttpLlmClient::new(
            url,
            std::env::var(LLM_KEY_ENV).ok(),
            std::env::var(LLM_MODEL_ENV).unwrap_or_else(|_| "gpt-4".into()),
            timeout,
        )),
        _ => Box::new(StubLlmClient),
    }
}
