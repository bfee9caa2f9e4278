use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde_json::{json, Value};
use thiserror::Error;

use super::stub::StubProvider;
use super::{AnnotationConfig, AnnotationError, ModelId, Provider};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    /// Connection failures, timeouts and 5xx responses. Retried.
    #[error("transport error: {0}")]
    Transport(String),
    /// HTTP 429. Retried.
    #[error("rate limited: {0}")]
    RateLimited(String),
    /// Any other failure (bad credentials, malformed request). Not retried.
    #[error("request rejected: {0}")]
    Rejected(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        !matches!(self, ProviderError::Rejected(_))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub task_id: &'a str,
    pub system: &'a str,
    pub user: &'a str,
}

/// Something that turns a system + user prompt into raw response text.
#[async_trait]
pub trait CompletionProvider: Send + Sync {
    async fn complete(&self, request: CompletionRequest<'_>) -> Result<String, ProviderError>;
}

pub fn credential_var(provider: Provider) -> Option<&'static str> {
    match provider {
        Provider::A => Some("PROVIDER_A_KEY"),
        Provider::B => Some("PROVIDER_B_KEY"),
        Provider::C => Some("PROVIDER_C_KEY"),
        Provider::Stub => None,
    }
}

fn base_url_var(provider: Provider) -> &'static str {
    match provider {
        Provider::A => "PROVIDER_A_BASE_URL",
        Provider::B => "PROVIDER_B_BASE_URL",
        Provider::C => "PROVIDER_C_BASE_URL",
        Provider::Stub => "",
    }
}

fn default_base_url(provider: Provider) -> &'static str {
    match provider {
        Provider::A => "https://api.openai.com",
        Provider::B => "https://api.anthropic.com",
        Provider::C => "https://generativelanguage.googleapis.com",
        Provider::Stub => "",
    }
}

/// HTTP client for one live model. The three wire formats differ only in
/// URL, auth header, request body and where the text sits in the reply.
pub struct HttpProvider {
    model: ModelId,
    api_key: String,
    base_url: String,
    client: reqwest::Client,
}

impl HttpProvider {
    pub fn new(
        model: ModelId,
        api_key: String,
        base_url: String,
        timeout: Duration,
    ) -> Result<Self, ProviderError> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::Rejected(e.to_string()))?;
        Ok(Self {
            model,
            api_key,
            base_url: base_url.trim_end_matches('/').to_string(),
            client,
        })
    }

    fn endpoint(&self) -> String {
        match self.model.provider() {
            Provider::A => format!("{}/v1/chat/completions", self.base_url),
            Provider::B => format!("{}/v1/messages", self.base_url),
            Provider::C => format!(
                "{}/v1beta/models/{}:generateContent",
                self.base_url,
                self.model.model_name()
            ),
            Provider::Stub => unreachable!("stub models never use HTTP"),
        }
    }
}

pub(crate) fn request_body(model: &ModelId, system: &str, user: &str) -> Value {
    match model.provider() {
        Provider::A => {
            let mut body = json!({
                "model": model.model_name(),
                "messages": [
                    {"role": "system", "content": system},
                    {"role": "user", "content": user},
                ],
                "temperature": model.temperature(),
            });
            if let Some(seed) = model.seed() {
                body["seed"] = json!(seed);
            }
            body
        }
        Provider::B => json!({
            "model": model.model_name(),
            "max_tokens": 1024,
            "system": system,
            "messages": [{"role": "user", "content": user}],
            "temperature": model.temperature(),
        }),
        Provider::C => {
            let mut generation = json!({ "temperature": model.temperature() });
            if let Some(seed) = model.seed() {
                generation["seed"] = json!(seed);
            }
            json!({
                "systemInstruction": {"parts": [{"text": system}]},
                "contents": [{"role": "user", "parts": [{"text": user}]}],
                "generationConfig": generation,
            })
        }
        Provider::Stub => Value::Null,
    }
}

/// Pulls the generated text out of a provider reply.
pub(crate) fn response_text(provider: Provider, body: &Value) -> Option<String> {
    let join = |parts: &Vec<Value>| -> Option<String> {
        let text: String = parts
            .iter()
            .filter_map(|p| p.get("text").and_then(Value::as_str))
            .collect();
        (!text.is_empty()).then_some(text)
    };
    match provider {
        Provider::A => body
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string),
        Provider::B => body.get("content").and_then(Value::as_array).and_then(join),
        Provider::C => body
            .pointer("/candidates/0/content/parts")
            .and_then(Value::as_array)
            .and_then(join),
        Provider::Stub => None,
    }
}

fn classify_status(status: u16, body: &str) -> ProviderError {
    let snippet: String = body.chars().take(200).collect();
    let msg = format!("HTTP {status}: {snippet}");
    match status {
        429 => ProviderError::RateLimited(msg),
        408 | 500..=599 => ProviderError::Transport(msg),
        _ => ProviderError::Rejected(msg),
    }
}

#[async_trait]
impl CompletionProvider for HttpProvider {
    async fn complete(&self, request: CompletionRequest<'_>) -> Result<String, ProviderError> {
        let body = request_body(&self.model, request.system, request.user);
        let mut req = self.client.post(self.endpoint()).json(&body);
        req = match self.model.provider() {
            Provider::A => req.bearer_auth(&self.api_key),
            Provider::B => req
                .header("x-api-key", &self.api_key)
                .header("anthropic-version", "2023-06-01"),
            Provider::C => req.header("x-goog-api-key", &self.api_key),
            Provider::Stub => unreachable!(),
        };
        let resp = req
            .send()
            .await
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .text()
            .await
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &text));
        }
        let json: Value = serde_json::from_str(&text)
            .map_err(|e| ProviderError::Transport(format!("invalid JSON envelope: {e}")))?;
        // An envelope without text counts as an unusable answer, which the
        // caller retries like any other parse failure.
        Ok(response_text(self.model.provider(), &json).unwrap_or_default())
    }
}

/// Builds the backend for a model, reading credentials and optional base
/// URL overrides through `env`.
pub fn backend_for(
    model: &ModelId,
    config: &AnnotationConfig,
    env: impl Fn(&str) -> Option<String>,
) -> Result<Arc<dyn CompletionProvider>, AnnotationError> {
    let provider = model.provider();
    let Some(var) = credential_var(provider) else {
        let seed = model.seed().expect("stub models always carry a seed");
        return Ok(Arc::new(StubProvider::new(seed)));
    };
    let key = env(var)
        .filter(|k| !k.trim().is_empty())
        .ok_or(AnnotationError::MissingCredentials {
            provider,
            variable: var,
        })?;
    let base = env(base_url_var(provider)).unwrap_or_else(|| default_base_url(provider).to_string());
    let http = HttpProvider::new(
        model.clone(),
        key,
        base,
        Duration::from_millis(config.request_timeout_ms),
    )
    .map_err(|e| AnnotationError::Rejected {
        attempts: 0,
        reason: e.to_string(),
    })?;
    Ok(Arc::new(http))
}
