//! Chat-completion transports: a blocking HTTP client and an offline replay.

use std::collections::HashMap;
use std::io::BufRead;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub auth_env: String,
    pub timeout_secs: u64,
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub max_in_flight: usize,
    /// First backoff delay; doubles on every further retry.
    pub backoff_base_ms: u64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".to_string(),
            model: "gpt-4".to_string(),
            auth_env: "OPENAI_API_KEY".to_string(),
            timeout_secs: 60,
            max_retries: 3,
            max_in_flight: 4,
            backoff_base_ms: 500,
        }
    }
}

impl TransportConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_in_flight == 0 {
            return Err("max_in_flight must be at least 1".into());
        }
        if self.timeout_secs == 0 {
            return Err("timeout_secs must be positive".into());
        }
        Ok(())
    }

    pub fn backoff(&self, retry: u32) -> Duration {
        Duration::from_millis(self.backoff_base_ms.saturating_mul(1 << retry.min(16)))
    }
}

/// Why a single attempt failed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Failure {
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("{0}")]
    Fatal(String),
}

impl Failure {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::RateLimited(_) | Self::Transient(_))
    }
}

pub trait Transport: Sync {
    fn complete(&self, prompt: &str) -> Result<String, Failure>;
}

/// Wraps a closure as a transport.
pub struct FnTransport<F>(pub F);

impl<F: Fn(&str) -> Result<String, Failure> + Sync> Transport for FnTransport<F> {
    fn complete(&self, prompt: &str) -> Result<String, Failure> {
        (self.0)(prompt)
    }
}

/// OpenAI-style chat completion over HTTPS. The token is read from the
/// environment on every request and never stored in config.
pub struct HttpTransport {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    auth_env: String,
}

impl HttpTransport {
    pub fn new(cfg: &TransportConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Self {
            agent,
            endpoint: cfg.endpoint.clone(),
            model: cfg.model.clone(),
            auth_env: cfg.auth_env.clone(),
        }
    }
}

pub fn response_content(body: &Value) -> Option<&str> {
    body.get("choices")?.get(0)?.get("message")?.get("content")?.as_str()
}

impl Transport for HttpTransport {
    fn complete(&self, prompt: &str) -> Result<String, Failure> {
        let token = std::env::var(&self.auth_env)
            .map_err(|_| Failure::Auth(format!("environment variable {} is not set", self.auth_env)))?;
        let body = json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {token}"))
            .send_json(&body)
            .map_err(|e| Failure::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Transient(e.to_string()))?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(Failure::Auth(format!("HTTP {status}"))),
            429 => return Err(Failure::RateLimited(format!("HTTP {status}"))),
            500..=599 => return Err(Failure::Transient(format!("HTTP {status}"))),
            _ => return Err(Failure::Fatal(format!("HTTP {status}: {text}"))),
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Fatal(e.to_string()))?;
        response_content(&value)
            .map(str::to_string)
            .ok_or_else(|| Failure::Fatal("response has no choices[0].message.content".into()))
    }
}

/// Answers prompts from recorded responses.
#[derive(Clone, Debug, Default)]
pub struct ReplayTransport {
    responses: HashMap<String, String>,
}

impl ReplayTransport {
    pub fn insert(&mut self, prompt: impl Into<String>, response: impl Into<String>) {
        self.responses.insert(prompt.into(), response.into());
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Reads JSON lines carrying `prompt` and `response` string fields. This
    /// covers both hand-written fixtures and the executor's request log,
    /// whose `request` and `error` lines lack a response and are skipped.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, String> {
        let mut out = Self::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Value = serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", n + 1))?;
            if let (Some(p), Some(r)) = (
                v.get("prompt").and_then(Value::as_str),
                v.get("response").and_then(Value::as_str),
            ) {
                out.insert(p, r);
            }
        }
        Ok(out)
    }
}

impl Transport for ReplayTransport {
    fn complete(&self, prompt: &str) -> Result<String, Failure> {
        self.responses
            .get(prompt)
            .cloned()
            .ok_or_else(|| Failure::Fatal("no recorded response for this prompt".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_reads_fixtures_and_logs() {
        let data = r#"{"prompt":"p1","response":"r1"}
{"seq":0,"kind":"request","prompt":"p2"}
{"seq":1,"kind":"response","prompt":"p2","response":"r2"}

"#;
        let t = ReplayTransport::from_jsonl(data.as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.complete("p2").unwrap(), "r2");
        assert!(matches!(t.complete("p3"), Err(Failure::Fatal(_))));
        assert!(ReplayTransport::from_jsonl("{oops".as_bytes()).is_err());
    }

    #[test]
    fn missing_token_is_auth_failure() {
        let cfg = TransportConfig {
            auth_env: "AGEC_TEST_TOKEN_THAT_IS_NOT_SET".into(),
            ..TransportConfig::default()
        };
        let t = HttpTransport::new(&cfg);
        assert!(matches!(t.complete("x"), Err(Failure::Auth(_))));
    }

    #[test]
    fn content_extraction_and_config() {
        let v = json!({"choices":[{"message":{"role":"assistant","content":"hi"}}]});
        assert_eq!(response_content(&v), Some("hi"));
        assert_eq!(response_content(&json!({})), None);
        let cfg = TransportConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.backoff(2), Duration::from_millis(2000));
        let bad = TransportConfig {
            max_in_flight: 0,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }
}
