//! OpenAI-compatible chat-completions and embeddings over blocking HTTP.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::config::{InferenceConfig, API_KEY_ENV};
use crate::error::LlmError;

/// Something that can answer prompts and embed text.
pub trait Backend: Send + Sync {
    fn chat(&self, prompt: &str, config: &InferenceConfig) -> Result<String, LlmError>;
    fn embed(&self, text: &str, model: &str) -> Result<Vec<f64>, LlmError>;
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    messages: Vec<ChatMessage<'a>>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a str,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: String,
    max_retries: u32,
    backoff: Duration,
}

impl HttpBackend {
    /// Builds a backend for `config`, reading the key from
    /// [`API_KEY_ENV`].
    pub fn from_env(config: &InferenceConfig) -> Result<Self, LlmError> {
        let key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or(LlmError::MissingCredential(API_KEY_ENV))?;
        Self::new(config, key)
    }

    pub fn new(config: &InferenceConfig, api_key: impl Into<String>) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_seconds))
            .build()
            .map_err(|e| LlmError::Transport {
                url: config.endpoint_url.clone(),
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(Self {
            client,
            endpoint: config.endpoint_url.trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            max_retries: config.max_retries,
            backoff: Duration::from_millis(500),
        })
    }

    /// Base delay before the first retry; doubles on every further attempt.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    fn post<B: Serialize, R: for<'de> Deserialize<'de>>(&self, path: &str, body: &B) -> Result<R, LlmError> {
        let url = format!("{}/{}", self.endpoint, path);
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let outcome = self
                .client
                .post(&url)
                .bearer_auth(&self.api_key)
                .json(body)
                .send();
            let retryable_message = match outcome {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let text = resp.text().map_err(|e| LlmError::BadResponse {
                            url: url.clone(),
                            message: e.to_string(),
                        })?;
                        return serde_json::from_str(&text).map_err(|e| LlmError::BadResponse {
                            url: url.clone(),
                            message: e.to_string(),
                        });
                    }
                    let body = resp.text().unwrap_or_default();
                    if status.as_u16() != 429 && !status.is_server_error() {
                        return Err(LlmError::Http {
                            url,
                            status: status.as_u16(),
                            body,
                        });
                    }
                    format!("HTTP {status}: {body}")
                }
                Err(e) => e.to_string(),
            };
            if attempt > self.max_retries {
                return Err(LlmError::Transport {
                    url,
                    attempts: attempt,
                    message: retryable_message,
                });
            }
            log::warn!("{url}: attempt {attempt} failed ({retryable_message}), retrying");
            thread::sleep(self.backoff * 2u32.saturating_pow(attempt - 1));
        }
    }
}

impl Backend for HttpBackend {
    fn chat(&self, prompt: &str, config: &InferenceConfig) -> Result<String, LlmError> {
        let req = ChatRequest {
            model: &config.model_name,
            temperature: config.temperature,
            seed: config.seed,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
        };
        let resp: ChatResponse = self.post("chat/completions", &req)?;
        resp.choices
            .into_iter()
            .next()
            .map(|c| c.message.content.unwrap_or_default())
            .ok_or_else(|| LlmError::BadResponse {
                url: format!("{}/chat/completions", self.endpoint),
                message: "no choices".into(),
            })
    }

    fn embed(&self, text: &str, model: &str) -> Result<Vec<f64>, LlmError> {
        let req = EmbeddingRequest { model, input: text };
        let resp: EmbeddingResponse = self.post("embeddings", &req)?;
        resp.data
            .into_iter()
            .next()
            .map(|d| d.embedding)
            .ok_or_else(|| LlmError::BadResponse {
                url: format!("{}/embeddings", self.endpoint),
                message: "no embedding data".into(),
            })
    }
}
