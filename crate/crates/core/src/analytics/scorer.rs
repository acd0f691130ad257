use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub toxicity: f64,
    pub severe_toxicity: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("request failed: {0}")]
    Transport(String),
    #[error("service answered {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unexpected response: {0}")]
    Response(String),
}

impl ScoreError {
    fn retryable(&self) -> bool {
        match self {
            ScoreError::Transport(_) => true,
            ScoreError::Status { status, .. } => *status == 429 || *status >= 500,
            ScoreError::Response(_) => false,
        }
    }
}

pub trait Scorer: Sync {
    fn score(&self, text: &str) -> Result<Scores, ScoreError>;
}

/// Offline scorer. Without a fixed value, scores are derived from a hash of
/// the text, so they are stable across runs and machines.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubScorer {
    fixed: Option<Scores>,
}

impl StubScorer {
    pub fn hashed() -> Self {
        StubScorer { fixed: None }
    }

    pub fn constant(toxicity: f64, severe_toxicity: f64) -> Self {
        StubScorer {
            fixed: Some(Scores {
                toxicity,
                severe_toxicity,
            }),
        }
    }
}

fn unit(bytes: &[u8]) -> f64 {
    let v = u64::from_le_bytes(bytes.try_into().expect("8 bytes"));
    (v >> 11) as f64 / (1u64 << 53) as f64
}

impl Scorer for StubScorer {
    fn score(&self, text: &str) -> Result<Scores, ScoreError> {
        if let Some(s) = self.fixed {
            return Ok(s);
        }
        let digest = Sha256::digest(text.as_bytes());
        let toxicity = unit(&digest[0..8]);
        Ok(Scores {
            toxicity,
            severe_toxicity: toxicity * unit(&digest[8..16]),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    /// Requests per second across all threads.
    pub rate_limit: f64,
    pub timeout: Duration,
    pub max_attempts: u32,
    /// Delay before the first retry; doubled on every further attempt.
    pub backoff: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            endpoint: "https://commentanalyzer.googleapis.com/v1alpha1/comments:analyze".into(),
            api_key: None,
            rate_limit: 1.0,
            timeout: Duration::from_secs(10),
            max_attempts: 5,
            backoff: Duration::from_millis(500),
        }
    }
}

/// Spaces requests at least `1 / rate` seconds apart.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(per_second: f64) -> Self {
        let interval = if per_second > 0.0 && per_second.is_finite() {
            Duration::from_secs_f64(1.0 / per_second)
        } else {
            Duration::ZERO
        };
        RateLimiter {
            interval,
            next: Mutex::new(None),
        }
    }

    /// Blocks until the caller may send, and returns the granted slot.
    pub fn acquire(&self) -> Instant {
        let slot = {
            let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
        slot
    }
}

/// Client for a comment-analysis service speaking the common
/// `attributeScores` JSON shape.
pub struct HttpScorer {
    config: ClientConfig,
    client: reqwest::blocking::Client,
    limiter: RateLimiter,
}

impl HttpScorer {
    pub fn new(config: ClientConfig) -> Result<Self, ScoreError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ScoreError::Transport(e.to_string()))?;
        Ok(HttpScorer {
            limiter: RateLimiter::new(config.rate_limit),
            config,
            client,
        })
    }

    fn attempt(&self, text: &str) -> Result<Scores, ScoreError> {
        self.limiter.acquire();
        let body = json!({
            "comment": { "text": text },
            "languages": ["en"],
            "requestedAttributes": { "TOXICITY": {}, "SEVERE_TOXICITY": {} },
        });
        let mut req = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.query(&[("key", key)]);
        }
        let resp = req
            .send()
            .map_err(|e| ScoreError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| ScoreError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ScoreError::Status {
                status: status.as_u16(),
                body: text.chars().take(200).collect(),
            });
        }
        parse_response(&text)
    }
}

fn parse_response(body: &str) -> Result<Scores, ScoreError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| ScoreError::Response(e.to_string()))?;
    let get = |attr: &str| {
        v.pointer(&format!("/attributeScores/{attr}/summaryScore/value"))
            .and_then(serde_json::Value::as_f64)
            .filter(|x| (0.0..=1.0).contains(x))
            .ok_or_else(|| ScoreError::Response(format!("missing {attr} score")))
    };
    Ok(Scores {
        toxicity: get("TOXICITY")?,
        severe_toxicity: get("SEVERE_TOXICITY")?,
    })
}

impl Scorer for HttpScorer {
    fn score(&self, text: &str) -> Result<Scores, ScoreError> {
        let mut delay = self.config.backoff;
        let mut attempt = 1;
        loop {
            match self.attempt(text) {
                Ok(s) => return Ok(s),
                Err(e) if e.retryable() && attempt < self.config.max_attempts => {
                    log::debug!("scoring attempt {attempt} failed: {e}; retrying in {delay:?}");
                    thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
