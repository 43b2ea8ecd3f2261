//! Chat-completion client and the LLM-backed ranker.
//!
//! Speaks the widely deployed `POST /v1/chat/completions` protocol and reads
//! `choices[0].message.content`. Transport errors, non-auth HTTP errors and
//! unparseable answers are retried up to `max_retries` total attempts with
//! exponential backoff; auth failures are fatal.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tracing::warn;

use super::answer::parse_answer;
use super::prompt::{build_prompt, Prompt};
use super::{RankRequest, RankResponse, Ranker, RankerError, SamplingParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key. `None` sends
    /// no Authorization header (local inference servers).
    pub api_key_env: Option<String>,
    /// Total attempts per request, including the first.
    pub max_retries: u32,
    pub timeout_s: f64,
    pub max_concurrency: usize,
    pub backoff_ms: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "http://localhost:8000".into(),
            model: "default".into(),
            api_key_env: None,
            max_retries: 3,
            timeout_s: 120.0,
            max_concurrency: 8,
            backoff_ms: 250,
        }
    }
}

/// Counting semaphore capping in-flight requests.
#[derive(Debug)]
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Gate {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug)]
enum AttemptError {
    Fatal(RankerError),
    Retryable(String),
}

/// Result of a completion call that did not hit a fatal error.
#[derive(Debug, Clone, PartialEq)]
pub enum ChatOutcome<T> {
    Done {
        value: T,
        raw: String,
        retries: u32,
        latency_ms: u64,
    },
    Failed {
        error: String,
        retries: u32,
        latency_ms: u64,
    },
}

#[derive(Debug)]
pub struct ChatClient {
    cfg: EndpointConfig,
    url: String,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
    gate: Gate,
}

impl ChatClient {
    pub fn new(cfg: EndpointConfig) -> Result<Self, RankerError> {
        if cfg.max_retries == 0 {
            return Err(RankerError::Config(
                "endpoint.max_retries must be >= 1".into(),
            ));
        }
        if !(cfg.timeout_s > 0.0 && cfg.timeout_s.is_finite()) {
            return Err(RankerError::Config(
                "endpoint.timeout_s must be positive".into(),
            ));
        }
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                RankerError::Config(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let base = cfg.base_url.trim_end_matches('/');
        if !(base.starts_with("http://") || base.starts_with("https://")) {
            return Err(RankerError::Config(format!(
                "endpoint.base_url must be an http(s) URL, got {:?}",
                cfg.base_url
            )));
        }
        let url = if base.ends_with("/v1") {
            format!("{base}/chat/completions")
        } else {
            format!("{base}/v1/chat/completions")
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_s))
            .build()
            .map_err(|e| RankerError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(ChatClient {
            gate: Gate::new(cfg.max_concurrency),
            cfg,
            url,
            api_key,
            http,
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }

    fn send_once(
        &self,
        prompt: &Prompt,
        sampling: &SamplingParams,
    ) -> Result<String, AttemptError> {
        let mut body = json!({
            "model": self.cfg.model,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": sampling.temperature,
            "top_p": sampling.top_p,
            "max_tokens": sampling.max_tokens,
        });
        if let Some(top_k) = sampling.top_k {
            body["top_k"] = json!(top_k);
        }
        let _permit = self.gate.acquire();
        let mut req = self.http.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| AttemptError::Retryable(format!("request failed: {e}")))?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(AttemptError::Fatal(RankerError::Config(format!(
                "endpoint rejected credentials ({status})"
            ))));
        }
        if !status.is_success() {
            return Err(AttemptError::Retryable(format!("HTTP {status}")));
        }
        let payload: Value = resp
            .json()
            .map_err(|e| AttemptError::Retryable(format!("invalid JSON body: {e}")))?;
        payload["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| {
                AttemptError::Retryable("response lacks choices[0].message.content".into())
            })
    }

    /// Sends `prompt` until `accept` succeeds on the returned text or the
    /// attempt budget runs out.
    pub fn complete<T>(
        &self,
        prompt: &Prompt,
        sampling: &SamplingParams,
        accept: impl Fn(&str) -> Result<T, RankerError>,
    ) -> Result<ChatOutcome<T>, RankerError> {
        let start = Instant::now();
        let mut last_error = String::new();
        for attempt in 0..self.cfg.max_retries {
            if attempt > 0 {
                let backoff = self
                    .cfg
                    .backoff_ms
                    .saturating_mul(1 << (attempt - 1).min(6));
                std::thread::sleep(Duration::from_millis(backoff.min(10_000)));
            }
            match self.send_once(prompt, sampling) {
                Ok(text) => match accept(&text) {
                    Ok(value) => {
                        return Ok(ChatOutcome::Done {
                            value,
                            raw: text,
                            retries: attempt,
                            latency_ms: start.elapsed().as_millis() as u64,
                        })
                    }
                    Err(e) => last_error = e.to_string(),
                },
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Retryable(msg)) => last_error = msg,
            }
        }
        Ok(ChatOutcome::Failed {
            error: last_error,
            retries: self.cfg.max_retries - 1,
            latency_ms: start.elapsed().as_millis() as u64,
        })
    }
}

/// Ranker backed by a chat-completion endpoint.
#[derive(Debug)]
pub struct LlmRanker {
    client: ChatClient,
}

impl LlmRanker {
    pub fn new(cfg: EndpointConfig) -> Result<Self, RankerError> {
        Ok(LlmRanker {
            client: ChatClient::new(cfg)?,
        })
    }

    pub fn client(&self) -> &ChatClient {
        &self.client
    }
}

impl Ranker for LlmRanker {
    fn rank(&self, req: &RankRequest<'_>) -> Result<RankResponse, RankerError> {
        let k = req.k();
        let prompt = build_prompt(req);
        match self
            .client
            .complete(&prompt, &req.sampling, |text| parse_answer(text, k))?
        {
            ChatOutcome::Done {
                value,
                raw,
                retries,
                latency_ms,
            } => Ok(RankResponse {
                raw_text: raw,
                ordering: value.ordering,
                repaired: value.repaired,
                degraded: false,
                retries,
                latency_ms,
                error: None,
            }),
            ChatOutcome::Failed {
                error,
                retries,
                latency_ms,
            } => {
                warn!(request = %req.request_id, %error, "ranker call failed; falling back to identity order");
                Ok(RankResponse::degraded(k, retries, latency_ms, error))
            }
        }
    }

    fn name(&self) -> String {
        format!("llm({})", self.client.cfg.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_config() {
        let cfg = EndpointConfig {
            max_retries: 0,
            ..Default::default()
        };
        assert!(matches!(ChatClient::new(cfg), Err(RankerError::Config(_))));
        let cfg = EndpointConfig {
            api_key_env: Some("JOBFIT_TEST_SURELY_UNSET_VAR".into()),
            ..Default::default()
        };
        assert!(matches!(ChatClient::new(cfg), Err(RankerError::Config(_))));
        let cfg = EndpointConfig {
            base_url: "localhost:8000".into(),
            ..Default::default()
        };
        assert!(matches!(ChatClient::new(cfg), Err(RankerError::Config(_))));
    }

    #[test]
    fn url_joining() {
        let c = ChatClient::new(EndpointConfig {
            base_url: "http://h:1/v1/".into(),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.url, "http://h:1/v1/chat/completions");
        let c = ChatClient::new(EndpointConfig::default()).unwrap();
        assert_eq!(c.url, "http://localhost:8000/v1/chat/completions");
    }
}
