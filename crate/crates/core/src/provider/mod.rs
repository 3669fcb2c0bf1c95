//! Completion providers: the wire client for chat-completion endpoints, a
//! scripted replay provider, an echo double, and local token accounting.

mod scripted;
mod wire;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scripted::{load_fixture, parse_fixture, ScriptedProvider};
pub use wire::{WireProvider, WireSettings, WireSettingsFile};

use crate::prompts::PromptRole;

pub const DEFAULT_TEMPERATURE: f64 = 0.0;
pub const DEFAULT_TOP_P: f64 = 0.8;
pub const DEFAULT_PRESENCE_PENALTY: f64 = 0.1;
pub const DEFAULT_FREQUENCY_PENALTY: f64 = 0.1;
pub const DEFAULT_MAX_TOKENS: u32 = 512;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("request has no messages")]
    EmptyRequest,
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response body: {0}")]
    Decode(String),
    #[error("empty completion")]
    EmptyCompletion,
    #[error("scripted miss for {role} at {stage} (digest `{digest}`); nearest keys: {nearest:?}")]
    ScriptedMiss {
        role: String,
        stage: String,
        digest: String,
        nearest: Vec<String>,
    },
    #[error("configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::User,
            content: content.into(),
        }
    }
}

/// Which reflecting call a request belongs to. Never sent over the wire;
/// the scripted provider keys on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestTag {
    pub role: PromptRole,
    /// `None` for the initial holistic plan built before step 1.
    pub step: Option<usize>,
    /// 1 for the first attempt, 2 for a re-prompt.
    pub attempt: u32,
}

impl RequestTag {
    pub fn stage(&self) -> String {
        match self.step {
            None => "init".to_string(),
            Some(t) => format!("step{t}"),
        }
    }

    /// Canonical digest, e.g. `score:step6:try1` or `holistic:init:try1`.
    pub fn digest(&self) -> String {
        format!("{}:{}:try{}", self.role.as_str(), self.stage(), self.attempt)
    }
}

impl fmt::Display for RequestTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digest())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub top_p: f64,
    pub presence_penalty: f64,
    pub frequency_penalty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(skip)]
    pub tag: Option<RequestTag>,
}

impl CompletionRequest {
    pub fn new(model: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        CompletionRequest {
            model: model.into(),
            messages,
            temperature: DEFAULT_TEMPERATURE,
            top_p: DEFAULT_TOP_P,
            presence_penalty: DEFAULT_PRESENCE_PENALTY,
            frequency_penalty: DEFAULT_FREQUENCY_PENALTY,
            max_tokens: Some(DEFAULT_MAX_TOKENS),
            tag: None,
        }
    }

    pub fn with_tag(mut self, tag: RequestTag) -> Self {
        self.tag = Some(tag);
        self
    }

    pub fn last_user_message(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == ChatRole::User)
            .map(|m| m.content.as_str())
    }

    /// Local token estimate over all message contents.
    pub fn approx_prompt_tokens(&self) -> u64 {
        self.messages.iter().map(|m| count_tokens(&m.content)).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl std::ops::AddAssign for Usage {
    fn add_assign(&mut self, rhs: Usage) {
        self.prompt_tokens += rhs.prompt_tokens;
        self.completion_tokens += rhs.completion_tokens;
    }
}

impl std::ops::Add for Usage {
    type Output = Usage;

    fn add(mut self, rhs: Usage) -> Usage {
        self += rhs;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionResponse {
    pub content: String,
    pub usage: Usage,
    pub provider_reported_usage: bool,
}

impl CompletionResponse {
    /// Response whose usage is estimated with [`count_tokens`].
    pub fn estimated(request: &CompletionRequest, content: String) -> Self {
        let usage = Usage {
            prompt_tokens: request.approx_prompt_tokens(),
            completion_tokens: count_tokens(&content),
        };
        CompletionResponse {
            content,
            usage,
            provider_reported_usage: false,
        }
    }
}

pub trait Provider: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ProviderError>;
}

impl<P: Provider + ?Sized> Provider for std::sync::Arc<P> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        (**self).complete(request)
    }
}

impl<P: Provider + ?Sized> Provider for Box<P> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        (**self).complete(request)
    }
}

/// Test double: answers with the last user message.
#[derive(Debug, Default, Clone, Copy)]
pub struct EchoProvider;

impl Provider for EchoProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        let content = request
            .last_user_message()
            .ok_or(ProviderError::EmptyRequest)?
            .to_string();
        Ok(CompletionResponse::estimated(request, content))
    }
}

/// Approximate token count.
///
/// Splits on whitespace and charges each piece one token plus one more for
/// every full four characters beyond its first four. Used where a provider
/// reports no usage.
pub fn count_tokens(text: &str) -> u64 {
    text.split_whitespace()
        .map(|piece| {
            let chars = piece.chars().count() as u64;
            1 + chars.saturating_sub(4) / 4
        })
        .sum()
}
