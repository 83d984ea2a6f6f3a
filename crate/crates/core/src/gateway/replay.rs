//! Deterministic fixtures: one JSON file per exchange, named by the digest
//! of the canonicalized request.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::{duration_ms, ChatBackend, ChatExchange, ChatMessage, ChatParams, GatewayError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub key: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default)]
    pub attempt: u32,
    pub messages: Vec<ChatMessage>,
    pub response_text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    #[serde(rename = "latency_ms", with = "duration_ms")]
    pub latency: Duration,
    pub timestamp: DateTime<Utc>,
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Hex SHA-256 of the canonical request. Object keys are sorted and every
/// run of whitespace in message content collapses to one space.
pub fn request_key(messages: &[ChatMessage], params: &ChatParams) -> String {
    let msgs: Vec<Value> = messages
        .iter()
        .map(|m| json!({ "role": m.role, "content": normalize_ws(&m.content) }))
        .collect();
    let mut obj = Map::new();
    obj.insert("model".into(), json!(params.model_id));
    obj.insert("temperature".into(), json!(params.temperature));
    obj.insert("max_tokens".into(), json!(params.max_tokens));
    obj.insert("messages".into(), Value::Array(msgs));
    if params.attempt > 0 {
        obj.insert("attempt".into(), json!(params.attempt));
    }
    let canonical = Value::Object(obj).to_string();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn fixture_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

pub fn read_fixture(path: &Path) -> Result<Fixture, GatewayError> {
    let text = fs::read_to_string(path).map_err(|e| GatewayError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| GatewayError::Io(format!("{}: {e}", path.display())))
}

/// Persists `exchange` under `dir`, returning its key. Recording the same
/// request twice is idempotent when the response matches and a
/// [`GatewayError::FixtureConflict`] otherwise.
pub fn record_fixture(exchange: &ChatExchange, dir: &Path) -> Result<String, GatewayError> {
    let io = |e: std::io::Error| GatewayError::Io(format!("{}: {e}", dir.display()));
    let key = request_key(&exchange.request_messages, &exchange.params());
    let path = fixture_path(dir, &key);
    if path.exists() {
        let existing = read_fixture(&path)?;
        let same = existing.response_text == exchange.response_text
            && existing.prompt_tokens == exchange.prompt_tokens
            && existing.completion_tokens == exchange.completion_tokens;
        return if same { Ok(key) } else { Err(GatewayError::FixtureConflict { key }) };
    }
    fs::create_dir_all(dir).map_err(io)?;
    let fixture = Fixture {
        key: key.clone(),
        model_id: exchange.model_id.clone(),
        temperature: exchange.temperature,
        max_tokens: exchange.max_tokens,
        attempt: exchange.attempt,
        messages: exchange.request_messages.clone(),
        response_text: exchange.response_text.clone(),
        prompt_tokens: exchange.prompt_tokens,
        completion_tokens: exchange.completion_tokens,
        latency: exchange.latency,
        timestamp: exchange.timestamp,
    };
    let text = serde_json::to_string_pretty(&fixture).map_err(|e| GatewayError::Io(e.to_string()))?;
    let tmp = dir.join(format!(".{key}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(text.as_bytes()).map_err(io)?;
        f.write_all(b"\n").map_err(io)?;
    }
    fs::rename(&tmp, &path).map_err(io)?;
    Ok(key)
}

/// Answers requests from a fixture directory; never touches the network.
pub struct ReplayBackend {
    dir: PathBuf,
}

impl ReplayBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayBackend { dir: dir.into() }
    }
}

impl ChatBackend for ReplayBackend {
    fn send(&self, messages: &[ChatMessage], params: &ChatParams) -> Result<ChatExchange, GatewayError> {
        let key = request_key(messages, params);
        let path = fixture_path(&self.dir, &key);
        if !path.exists() {
            return Err(GatewayError::FixtureMissing { key });
        }
        let fx = read_fixture(&path)?;
        Ok(ChatExchange {
            request_messages: messages.to_vec(),
            response_text: fx.response_text,
            prompt_tokens: fx.prompt_tokens,
            completion_tokens: fx.completion_tokens,
            latency: fx.latency,
            model_id: params.model_id.clone(),
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            attempt: params.attempt,
            timestamp: fx.timestamp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ChatParams {
        ChatParams { model_id: "m".into(), temperature: 0.7, max_tokens: 8192, attempt: 0 }
    }

    fn exchange(user: &str, response: &str) -> ChatExchange {
        ChatExchange {
            request_messages: vec![ChatMessage::system("sys"), ChatMessage::user(user)],
            response_text: response.into(),
            prompt_tokens: 100,
            completion_tokens: 50,
            latency: Duration::from_millis(1234),
            model_id: "m".into(),
            temperature: 0.7,
            max_tokens: 8192,
            attempt: 0,
            timestamp: DateTime::<Utc>::from_timestamp(1_700_000_000, 0).unwrap(),
        }
    }

    #[test]
    fn recording_twice_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let ex = exchange("For the country of USA", "resp");
        let k1 = record_fixture(&ex, dir.path()).unwrap();
        let k2 = record_fixture(&ex, dir.path()).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn conflicting_response_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        record_fixture(&exchange("q", "a"), dir.path()).unwrap();
        let err = record_fixture(&exchange("q", "b"), dir.path()).unwrap_err();
        assert!(matches!(err, GatewayError::FixtureConflict { .. }));
    }

    #[test]
    fn different_placeholder_values_get_different_keys() {
        let a = exchange("Generate 5 unique family types for the following country: India.", "x");
        let b = exchange("Generate 5 unique family types for the following country: Japan.", "x");
        assert_ne!(
            request_key(&a.request_messages, &a.params()),
            request_key(&b.request_messages, &b.params())
        );
    }

    #[test]
    fn key_ignores_trailing_whitespace_and_separates_attempts() {
        let m1 = vec![ChatMessage::system("sys"), ChatMessage::user("hello world")];
        let m2 = vec![ChatMessage::system("sys \n"), ChatMessage::user("hello   world\n")];
        assert_eq!(request_key(&m1, &params()), request_key(&m2, &params()));
        assert_ne!(request_key(&m1, &params()), request_key(&m1, &params().with_attempt(1)));
    }

    #[test]
    fn key_is_independent_of_field_order() {
        // a message deserialized with fields in the other order canonicalizes identically
        let m: ChatMessage = serde_json::from_str(r#"{"content":"hello","role":"user"}"#).unwrap();
        let a = vec![ChatMessage::system("s"), m];
        let b = vec![ChatMessage::system("s"), ChatMessage::user("hello")];
        assert_eq!(request_key(&a, &params()), request_key(&b, &params()));
    }

    #[test]
    fn replay_returns_recorded_text_and_latency() {
        let dir = tempfile::tempdir().unwrap();
        let ex = exchange("q", "$$MESSAGE_START$$x$$MESSAGE_END$$");
        record_fixture(&ex, dir.path()).unwrap();
        let replay = ReplayBackend::new(dir.path());
        let got = replay.send(&ex.request_messages, &params()).unwrap();
        assert_eq!(got.response_text, ex.response_text);
        assert_eq!(got.latency, Duration::from_millis(1234));
        assert_eq!(got.timestamp, ex.timestamp);
        let miss = replay.send(&[ChatMessage::system("other")], &params()).unwrap_err();
        assert!(matches!(miss, GatewayError::FixtureMissing { .. }));
        assert!(!miss.is_retryable());
    }
}
