use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::Utc;
use serde::Deserialize;
use serde_json::json;

use super::{ChatBackend, ChatExchange, ChatMessage, ChatParams, GatewayError};
use crate::transport::{Transport, TransportError};

/// OpenAI-compatible `POST {endpoint}/chat/completions` client.
pub struct HttpChatBackend {
    endpoint: String,
    api_key: Option<String>,
    transport: Arc<dyn Transport>,
    timeout: Duration,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

impl HttpChatBackend {
    pub fn new(endpoint: &str, api_key: Option<String>, transport: Arc<dyn Transport>, timeout: Duration) -> Self {
        HttpChatBackend {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            api_key,
            transport,
            timeout,
        }
    }

    pub fn request_body(messages: &[ChatMessage], params: &ChatParams) -> serde_json::Value {
        json!({
            "model": params.model_id,
            "messages": messages,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        })
    }
}

fn error_message(body: &str) -> String {
    serde_json::from_str::<serde_json::Value>(body)
        .ok()
        .and_then(|v| {
            v.pointer("/error/message")
                .or_else(|| v.get("detail"))
                .and_then(|m| m.as_str().map(str::to_string))
        })
        .unwrap_or_else(|| body.chars().take(500).collect())
}

impl ChatBackend for HttpChatBackend {
    fn send(&self, messages: &[ChatMessage], params: &ChatParams) -> Result<ChatExchange, GatewayError> {
        let url = format!("{}/chat/completions", self.endpoint);
        let body = Self::request_body(messages, params).to_string();
        let started = Instant::now();
        let resp = self
            .transport
            .post_json(&url, self.api_key.as_deref(), &body, self.timeout)
            .map_err(|e| match e {
                TransportError::Disabled => GatewayError::Transport("network access is disabled".into()),
                other => GatewayError::Transport(other.to_string()),
            })?;
        let latency = started.elapsed();

        match resp.status {
            200..=299 => {}
            408 | 429 | 500..=599 => {
                return Err(GatewayError::Transport(format!(
                    "HTTP {}: {}",
                    resp.status,
                    error_message(&resp.body)
                )))
            }
            status => return Err(GatewayError::Api { status, message: error_message(&resp.body) }),
        }

        let parsed: CompletionResponse =
            serde_json::from_str(&resp.body).map_err(|e| GatewayError::Protocol(e.to_string()))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| GatewayError::Protocol("response has no choices[0].message.content".into()))?;
        let usage = parsed
            .usage
            .ok_or_else(|| GatewayError::Protocol("response has no usage block".into()))?;

        Ok(ChatExchange {
            request_messages: messages.to_vec(),
            response_text: content,
            prompt_tokens: usage.prompt_tokens,
            completion_tokens: usage.completion_tokens,
            latency,
            model_id: params.model_id.clone(),
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            attempt: params.attempt,
            timestamp: Utc::now(),
        })
    }
}
