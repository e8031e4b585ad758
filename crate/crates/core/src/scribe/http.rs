//! Remote chat-completion scribe.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::critic::CriticVerdict;
use super::prompt::{user_message, SYSTEM_PROMPT};
use super::{Scribe, ScribeError};
use crate::diff::GroundedState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpScribeConfig {
    pub endpoint: String,
    #[serde(skip)]
    pub api_key: Option<String>,
    pub model: String,
    pub timeout_secs: u64,
}

impl HttpScribeConfig {
    /// Reads `SCRIBE_ENDPOINT` (required), `SCRIBE_API_KEY` and `SCRIBE_MODEL`.
    pub fn from_env() -> Result<Self, ScribeError> {
        let endpoint =
            std::env::var("SCRIBE_ENDPOINT").map_err(|_| ScribeError::BackendUnavailable("SCRIBE_ENDPOINT is not set".into()))?;
        Ok(Self {
            endpoint,
            api_key: std::env::var("SCRIBE_API_KEY").ok().filter(|k| !k.is_empty()),
            model: std::env::var("SCRIBE_MODEL").unwrap_or_else(|_| "default".into()),
            timeout_secs: 60,
        })
    }
}

/// One request/response exchange, kept for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub case_id: String,
    pub request: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub struct HttpScribe {
    config: HttpScribeConfig,
    client: reqwest::blocking::Client,
    transcripts: Vec<Transcript>,
}

/// Pulls the first JSON object out of a model reply, tolerating code fences
/// and surrounding prose.
pub fn extract_json_object(text: &str) -> Option<Value> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    if end < start {
        return None;
    }
    serde_json::from_str(&text[start..=end]).ok().filter(Value::is_object)
}

impl HttpScribe {
    pub fn new(config: HttpScribeConfig) -> Result<Self, ScribeError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ScribeError::BackendUnavailable(e.to_string()))?;
        Ok(Self {
            config,
            client,
            transcripts: Vec::new(),
        })
    }

    pub fn transcripts(&self) -> &[Transcript] {
        &self.transcripts
    }

    pub fn take_transcripts(&mut self) -> Vec<Transcript> {
        std::mem::take(&mut self.transcripts)
    }

    fn request_body(&self, state: &GroundedState, feedback: Option<&CriticVerdict>) -> Value {
        json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": user_message(state, feedback)},
            ],
        })
    }

    fn exchange(&self, body: &Value, t: &mut Transcript) -> Result<Value, ScribeError> {
        let mut req = self.client.post(&self.config.endpoint).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ScribeError::BackendUnavailable(e.to_string()))?;
        let status = resp.status();
        t.status = Some(status.as_u16());
        let text = resp.text().map_err(|e| ScribeError::BackendUnavailable(e.to_string()))?;
        t.response = Some(text.clone());
        if !status.is_success() {
            return Err(ScribeError::BackendUnavailable(format!("HTTP {status}")));
        }
        let envelope: Value =
            serde_json::from_str(&text).map_err(|e| ScribeError::UnparseableResponse(format!("response body: {e}")))?;
        let content = envelope
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| ScribeError::UnparseableResponse("missing choices[0].message.content".into()))?;
        extract_json_object(content).ok_or_else(|| ScribeError::UnparseableResponse("no JSON object in reply".into()))
    }
}

impl Scribe for HttpScribe {
    fn propose(&mut self, state: &GroundedState, feedback: Option<&CriticVerdict>) -> Result<Value, ScribeError> {
        let body = self.request_body(state, feedback);
        let mut t = Transcript {
            case_id: state.case.case_id.clone(),
            request: body.clone(),
            status: None,
            response: None,
            error: None,
        };
        let result = self.exchange(&body, &mut t);
        if let Err(e) = &result {
            t.error = Some(e.to_string());
        }
        self.transcripts.push(t);
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_fenced_json() {
        let v = extract_json_object("Sure:\n```json\n{\"a\": {\"b\": 1}}\n```").unwrap();
        assert_eq!(v["a"]["b"], 1);
        assert!(extract_json_object("no json here").is_none());
        assert!(extract_json_object("} {").is_none());
    }
}
