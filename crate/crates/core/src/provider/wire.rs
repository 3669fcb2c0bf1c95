use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::Value;
use tracing::warn;

use super::{CompletionRequest, CompletionResponse, Provider, ProviderError, Usage, DEFAULT_MAX_TOKENS};

pub const ENV_ENDPOINT: &str = "DUSAR_ENDPOINT";
pub const ENV_API_KEY: &str = "DUSAR_API_KEY";
pub const ENV_MODEL: &str = "DUSAR_MODEL";

const BODY_EXCERPT: usize = 512;

/// Optional settings as read from a config file (`[provider]` table) or
/// collected from command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSettingsFile {
    pub endpoint: Option<String>,
    pub api_key: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_retries: Option<u32>,
    pub backoff_ms: Option<u64>,
    pub max_tokens: Option<u32>,
}

impl WireSettingsFile {
    /// Reads the `[provider]` table of a TOML config file.
    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        #[derive(Deserialize)]
        struct Root {
            #[serde(default)]
            provider: WireSettingsFile,
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::Config(format!("cannot read {}: {e}", path.display())))?;
        let root: Root = toml::from_str(&text)
            .map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))?;
        Ok(root.provider)
    }

    /// Fields set in `self` win over `lower`.
    pub fn overlay(self, lower: WireSettingsFile) -> WireSettingsFile {
        WireSettingsFile {
            endpoint: self.endpoint.or(lower.endpoint),
            api_key: self.api_key.or(lower.api_key),
            model: self.model.or(lower.model),
            timeout_secs: self.timeout_secs.or(lower.timeout_secs),
            max_retries: self.max_retries.or(lower.max_retries),
            backoff_ms: self.backoff_ms.or(lower.backoff_ms),
            max_tokens: self.max_tokens.or(lower.max_tokens),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireSettings {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
    pub max_tokens: u32,
}

impl WireSettings {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        WireSettings {
            endpoint: endpoint.into(),
            api_key: None,
            model: model.into(),
            timeout: Duration::from_secs(120),
            max_retries: 3,
            backoff_base: Duration::from_millis(500),
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    /// Precedence: flags over environment over config file.
    pub fn resolve(
        flags: WireSettingsFile,
        env: impl Fn(&str) -> Option<String>,
        file: WireSettingsFile,
    ) -> Result<Self, ProviderError> {
        let from_env = WireSettingsFile {
            endpoint: env(ENV_ENDPOINT),
            api_key: env(ENV_API_KEY),
            model: env(ENV_MODEL),
            ..Default::default()
        };
        let merged = flags.overlay(from_env).overlay(file);
        let endpoint = merged.endpoint.filter(|e| !e.trim().is_empty()).ok_or_else(|| {
            ProviderError::Config(format!(
                "wire provider needs an endpoint: set {ENV_ENDPOINT}, --endpoint, or `endpoint` in the config file"
            ))
        })?;
        let model = merged.model.unwrap_or_else(|| "default".to_string());
        let mut s = WireSettings::new(endpoint, model);
        s.api_key = merged.api_key.filter(|k| !k.is_empty());
        if let Some(t) = merged.timeout_secs {
            s.timeout = Duration::from_secs(t);
        }
        if let Some(r) = merged.max_retries {
            s.max_retries = r;
        }
        if let Some(b) = merged.backoff_ms {
            s.backoff_base = Duration::from_millis(b);
        }
        if let Some(m) = merged.max_tokens {
            s.max_tokens = m;
        }
        Ok(s)
    }

    /// Full chat-completions URL; `/chat/completions` is appended unless present.
    pub fn url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

/// Blocking client for chat-completion endpoints.
pub struct WireProvider {
    settings: WireSettings,
    client: reqwest::blocking::Client,
}

enum Attempt {
    Retry(ProviderError),
    Fatal(ProviderError),
}

impl WireProvider {
    pub fn new(settings: WireSettings) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(settings.timeout)
            .build()
            .map_err(|e| ProviderError::Config(format!("http client: {e}")))?;
        Ok(WireProvider { settings, client })
    }

    pub fn settings(&self) -> &WireSettings {
        &self.settings
    }

    fn attempt(&self, url: &str, body: &[u8]) -> Result<Value, Attempt> {
        let mut req = self
            .client
            .post(url)
            .header("content-type", "application/json")
            .body(body.to_vec());
        if let Some(key) = &self.settings.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            Attempt::Retry(ProviderError::Transport {
                attempts: 0,
                message: e.to_string(),
            })
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| {
            Attempt::Retry(ProviderError::Transport {
                attempts: 0,
                message: e.to_string(),
            })
        })?;
        if !status.is_success() {
            let err = ProviderError::Status {
                status: status.as_u16(),
                body: excerpt(&text),
            };
            return Err(if status.as_u16() == 429 || status.is_server_error() {
                Attempt::Retry(err)
            } else {
                Attempt::Fatal(err)
            });
        }
        serde_json::from_str(&text).map_err(|e| Attempt::Fatal(ProviderError::Decode(e.to_string())))
    }
}

fn excerpt(body: &str) -> String {
    body.chars().take(BODY_EXCERPT).collect()
}

impl Provider for WireProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        if request.messages.is_empty() {
            return Err(ProviderError::EmptyRequest);
        }
        let mut request = request.clone();
        if request.model.is_empty() {
            request.model = self.settings.model.clone();
        }
        let body = serde_json::to_vec(&request).map_err(|e| ProviderError::Decode(e.to_string()))?;
        let url = self.settings.url();

        let mut attempts = 0u32;
        let doc = loop {
            attempts += 1;
            match self.attempt(&url, &body) {
                Ok(doc) => break doc,
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) => {
                    if attempts > self.settings.max_retries {
                        return Err(match e {
                            ProviderError::Transport { message, .. } => {
                                ProviderError::Transport { attempts, message }
                            }
                            other => other,
                        });
                    }
                    let delay = self.settings.backoff_base * 2u32.saturating_pow(attempts - 1);
                    warn!(attempt = attempts, error = %e, ?delay, "retrying completion request");
                    thread::sleep(delay);
                }
            }
        };
        parse_response(&request, &doc)
    }
}

/// Reads the first choice's message content and the optional usage block.
pub(crate) fn parse_response(
    request: &CompletionRequest,
    doc: &Value,
) -> Result<CompletionResponse, ProviderError> {
    let content = doc
        .pointer("/choices/0/message/content")
        .ok_or_else(|| ProviderError::Decode("missing choices[0].message.content".into()))?;
    let content = match content {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => return Err(ProviderError::Decode(format!("content is not a string: {other}"))),
    };
    if content.trim().is_empty() {
        return Err(ProviderError::EmptyCompletion);
    }
    let reported = doc.get("usage").and_then(|u| {
        Some(Usage {
            prompt_tokens: u.get("prompt_tokens")?.as_u64()?,
            completion_tokens: u.get("completion_tokens")?.as_u64()?,
        })
    });
    Ok(match reported {
        Some(usage) => CompletionResponse {
            content,
            usage,
            provider_reported_usage: true,
        },
        None => CompletionResponse::estimated(request, content),
    })
}
