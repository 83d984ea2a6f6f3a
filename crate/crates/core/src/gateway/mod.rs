//! Chat-completions gateway: live HTTP backend, fixture replay, retries and
//! the per-run exchange log used for token/time accounting.

mod http;
mod replay;
mod retry;

use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use http::HttpChatBackend;
pub use replay::{fixture_path, read_fixture, record_fixture, request_key, Fixture, ReplayBackend};
pub use retry::RetryPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::Assistant, content: content.into() }
    }
}

/// Decoding parameters. `attempt` is the stage-level retry ordinal: it is
/// never sent to the endpoint but separates fixture keys of retried
/// requests so a replayed retry can see a different answer.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatParams {
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub attempt: u32,
}

impl ChatParams {
    pub fn with_attempt(&self, attempt: u32) -> Self {
        ChatParams { attempt, ..self.clone() }
    }
}

pub mod duration_ms {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

/// One request/response pair with the usage reported by the endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub request_messages: Vec<ChatMessage>,
    pub response_text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    #[serde(rename = "latency_ms", with = "duration_ms")]
    pub latency: Duration,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default)]
    pub attempt: u32,
    pub timestamp: DateTime<Utc>,
}

impl ChatExchange {
    pub fn params(&self) -> ChatParams {
        ChatParams {
            model_id: self.model_id.clone(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            attempt: self.attempt,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum GatewayError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("API error {status}: {message}")]
    Api { status: u16, message: String },
    #[error("no fixture recorded for request {key}")]
    FixtureMissing { key: String },
    #[error("fixture {key} already recorded with a different response")]
    FixtureConflict { key: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("fixture I/O: {0}")]
    Io(String),
}

impl GatewayError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, GatewayError::Transport(_))
    }
}

pub trait ChatBackend: Send + Sync {
    fn send(&self, messages: &[ChatMessage], params: &ChatParams) -> Result<ChatExchange, GatewayError>;
}

/// Append-only collection of exchanges for one run. Entries are drained
/// and persisted by the pipeline at stage barriers.
#[derive(Debug, Default)]
pub struct ExchangeLog {
    entries: Mutex<Vec<ChatExchange>>,
}

impl ExchangeLog {
    pub fn append(&self, exchange: ChatExchange) {
        self.entries.lock().expect("exchange log poisoned").push(exchange);
    }

    pub fn drain(&self) -> Vec<ChatExchange> {
        std::mem::take(&mut *self.entries.lock().expect("exchange log poisoned"))
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("exchange log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct Gateway {
    backend: Arc<dyn ChatBackend>,
    retry: RetryPolicy,
    log: ExchangeLog,
    record_dir: Option<PathBuf>,
}

impl Gateway {
    pub fn new(backend: Arc<dyn ChatBackend>, retry: RetryPolicy) -> Self {
        Gateway { backend, retry, log: ExchangeLog::default(), record_dir: None }
    }

    pub fn with_recording(mut self, dir: PathBuf) -> Self {
        self.record_dir = Some(dir);
        self
    }

    pub fn log(&self) -> &ExchangeLog {
        &self.log
    }

    /// Sends one request, retrying transport failures with backoff.
    pub fn complete(&self, messages: &[ChatMessage], params: &ChatParams) -> Result<ChatExchange, GatewayError> {
        check_conversation(messages)?;
        let mut retries = 0;
        let exchange = loop {
            match self.backend.send(messages, params) {
                Ok(ex) => break ex,
                Err(e) if e.is_retryable() && retries < self.retry.max_retries => {
                    let delay = self.retry.delay(retries);
                    log::warn!("{e}; retry {} of {} in {:.1?}", retries + 1, self.retry.max_retries, delay);
                    if !delay.is_zero() {
                        std::thread::sleep(delay);
                    }
                    retries += 1;
                }
                Err(e) => return Err(e),
            }
        };
        if let Some(dir) = &self.record_dir {
            record_fixture(&exchange, dir)?;
        }
        self.log.append(exchange.clone());
        Ok(exchange)
    }
}

fn check_conversation(messages: &[ChatMessage]) -> Result<(), GatewayError> {
    let first = messages
        .first()
        .ok_or_else(|| GatewayError::InvalidRequest("empty conversation".into()))?;
    if first.role != Role::System {
        return Err(GatewayError::InvalidRequest("conversation must start with a system message".into()));
    }
    if messages.iter().skip(1).any(|m| m.role == Role::System) {
        return Err(GatewayError::InvalidRequest("more than one system message".into()));
    }
    if let Some(i) = messages.iter().position(|m| m.content.trim().is_empty()) {
        return Err(GatewayError::InvalidRequest(format!("message {i} is empty")));
    }
    Ok(())
}
