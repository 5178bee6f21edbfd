//! Chat-completions client with a content-addressed record/replay store.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex, OnceLock};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmEndpointConfig {
    /// Base URL of an OpenAI-compatible API, e.g. `https://host/v1`.
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub token_env: String,
    pub max_tokens: u32,
    pub temperature: f64,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub max_retries: u32,
    pub max_concurrent: usize,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for LlmEndpointConfig {
    fn default() -> Self {
        LlmEndpointConfig {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            token_env: "PCG_LLM_TOKEN".into(),
            max_tokens: 2048,
            temperature: 0.2,
            timeout: Duration::from_secs(60),
            max_retries: 2,
            max_concurrent: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlmMode {
    /// Recorded responses only; a miss is an error.
    Replay,
    /// Recorded response if present, otherwise a live call that is recorded.
    Record,
    Live,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("request timed out")]
    Timeout,
    #[error("endpoint returned HTTP {status}")]
    Http { status: u16, retryable: bool },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed completion: {0}")]
    Malformed(String),
    #[error("no recorded response for prompt {key}")]
    ReplayMiss { key: String },
    #[error("replay store: {0}")]
    Store(#[from] io::Error),
}

impl LlmError {
    /// Timeouts, 408, 429 and 5xx other than 501 are retried.
    pub fn is_retryable(&self) -> bool {
        match self {
            LlmError::Timeout | LlmError::Transport(_) => true,
            LlmError::Http { retryable, .. } => *retryable,
            _ => false,
        }
    }
}

pub fn status_is_retryable(status: u16) -> bool {
    matches!(status, 408 | 429 | 500 | 502 | 503 | 504)
}

/// Hex SHA-256 of the prompt text.
pub fn prompt_key(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Bearer token read from the environment. Never printed.
struct Token(String);

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Token(<redacted>)")
    }
}

struct Limiter {
    in_flight: Mutex<usize>,
    freed: Condvar,
    max: usize,
}

impl Limiter {
    fn acquire(&self) -> LimiterGuard<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.max {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        LimiterGuard(self)
    }
}

struct LimiterGuard<'a>(&'a Limiter);

impl Drop for LimiterGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.freed.notify_one();
    }
}

pub struct LlmClient {
    config: LlmEndpointConfig,
    mode: LlmMode,
    store: PathBuf,
    http: OnceLock<reqwest::blocking::Client>,
    store_lock: Mutex<()>,
    limiter: Limiter,
}

impl fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmClient")
            .field("config", &self.config)
            .field("mode", &self.mode)
            .field("store", &self.store)
            .finish_non_exhaustive()
    }
}

impl LlmClient {
    pub fn new(config: LlmEndpointConfig, mode: LlmMode, store: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let max = config.max_concurrent.max(1);
        Ok(LlmClient {
            config,
            mode,
            store: store.into(),
            http: OnceLock::new(),
            store_lock: Mutex::new(()),
            limiter: Limiter {
                in_flight: Mutex::new(0),
                freed: Condvar::new(),
                max,
            },
        })
    }

    pub fn config(&self) -> &LlmEndpointConfig {
        &self.config
    }

    pub fn mode(&self) -> LlmMode {
        self.mode
    }

    pub fn store_dir(&self) -> &Path {
        &self.store
    }

    fn store_path(&self, key: &str) -> PathBuf {
        self.store.join(format!("{key}.txt"))
    }

    pub fn recorded(&self, prompt: &str) -> Result<Option<String>, LlmError> {
        match fs::read_to_string(self.store_path(&prompt_key(prompt))) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Adds a response to the store. Existing entries are never replaced.
    pub fn record(&self, prompt: &str, response: &str) -> Result<PathBuf, LlmError> {
        let _guard = self.store_lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.store)?;
        let path = self.store_path(&prompt_key(prompt));
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => f.write_all(response.as_bytes())?,
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {}
            Err(e) => return Err(e.into()),
        }
        Ok(path)
    }

    /// Raw completion text for `prompt`.
    pub fn call(&self, prompt: &str) -> Result<String, LlmError> {
        match self.mode {
            LlmMode::Replay => self.recorded(prompt)?.ok_or_else(|| LlmError::ReplayMiss {
                key: prompt_key(prompt),
            }),
            LlmMode::Record => {
                if let Some(hit) = self.recorded(prompt)? {
                    return Ok(hit);
                }
                let text = self.call_live(prompt)?;
                self.record(prompt, &text)?;
                Ok(text)
            }
            LlmMode::Live => self.call_live(prompt),
        }
    }

    fn token(&self) -> Result<Token, LlmError> {
        match std::env::var(&self.config.token_env) {
            Ok(t) if !t.trim().is_empty() => Ok(Token(t.trim().to_string())),
            _ => Err(LlmError::Auth(format!(
                "environment variable {} is not set",
                self.config.token_env
            ))),
        }
    }

    fn call_live(&self, prompt: &str) -> Result<String, LlmError> {
        let token = self.token()?;
        let _slot = self.limiter.acquire();
        let mut attempt = 0;
        loop {
            match self.post_once(prompt, &token) {
                Err(e) if e.is_retryable() && attempt < self.config.max_retries => {
                    attempt += 1;
                    log::warn!("llm call failed ({e}), retry {attempt}/{}", self.config.max_retries);
                    thread::sleep(Duration::from_millis(250 << attempt.min(6)));
                }
                other => return other,
            }
        }
    }

    /// Built on first use; the blocking client cannot be created from async code.
    fn http(&self) -> Result<&reqwest::blocking::Client, LlmError> {
        if let Some(c) = self.http.get() {
            return Ok(c);
        }
        let c = reqwest::blocking::Client::builder()
            .timeout(self.config.timeout)
            .build()
            .map_err(|e| LlmError::Transport(e.without_url().to_string()))?;
        Ok(self.http.get_or_init(|| c))
    }

    fn post_once(&self, prompt: &str, token: &Token) -> Result<String, LlmError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": self.config.max_tokens,
            "temperature": self.config.temperature,
        });
        let started = std::time::Instant::now();
        let resp = self
            .http()?
            .post(&url)
            .bearer_auth(&token.0)
            .json(&body)
            .send()
            .map_err(transport)?;
        let status = resp.status().as_u16();
        log::debug!("llm POST {url} -> {status} in {:.2?}", started.elapsed());
        match status {
            200..=299 => {}
            401 | 403 => return Err(LlmError::Auth(format!("endpoint returned HTTP {status}"))),
            _ => {
                return Err(LlmError::Http {
                    status,
                    retryable: status_is_retryable(status),
                })
            }
        }
        let v: serde_json::Value = resp.json().map_err(transport)?;
        v.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| LlmError::Malformed("missing choices[0].message.content".into()))
    }
}

fn transport(e: reqwest::Error) -> LlmError {
    if e.is_timeout() {
        LlmError::Timeout
    } else {
        LlmError::Transport(e.without_url().to_string())
    }
}
