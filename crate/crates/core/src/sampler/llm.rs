//! Chat-completion client for any endpoint speaking the common
//! `/chat/completions` JSON shape.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{extract_program, Prompt, Sample, Sampler, SamplerError, SearchRng};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "UC_LLM_API_KEY";

const SYSTEM_MESSAGE: &str = "You are an expert in power system scheduling. You write short \
priority rules in a small arithmetic expression language. Reply with exactly one program \
enclosed in <program> and </program>.";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// Base URL; requests go to `{endpoint}/chat/completions`.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub retries: u32,
    /// Concurrent requests allowed across all workers.
    pub max_in_flight: usize,
    #[serde(skip)]
    pub api_key: String,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            temperature: 0.8,
            max_tokens: 256,
            timeout_secs: 30.0,
            retries: 2,
            max_in_flight: 4,
            api_key: String::new(),
        }
    }
}

impl LlmConfig {
    /// Reads the API key from [`API_KEY_ENV`].
    pub fn with_env_key(mut self) -> Result<Self, SamplerError> {
        match std::env::var(API_KEY_ENV) {
            Ok(key) if !key.trim().is_empty() => {
                self.api_key = key.trim().to_string();
                Ok(self)
            }
            _ => Err(SamplerError::Config(format!("{API_KEY_ENV} is not set"))),
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(SamplerError::Config("timeout must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(SamplerError::Config(
                "max_in_flight must be positive".into(),
            ));
        }
        if self.endpoint.is_empty() {
            return Err(SamplerError::Config("endpoint is empty".into()));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

/// Counting gate on in-flight requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
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

pub struct LlmSampler {
    config: LlmConfig,
    client: reqwest::blocking::Client,
    url: String,
    gate: Gate,
}

impl LlmSampler {
    pub fn new(config: LlmConfig) -> Result<Self, SamplerError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| SamplerError::Config(e.to_string()))?;
        let url = format!("{}/chat/completions", config.endpoint.trim_end_matches('/'));
        let gate = Gate {
            free: Mutex::new(config.max_in_flight),
            cv: Condvar::new(),
        };
        Ok(LlmSampler {
            config,
            client,
            url,
            gate,
        })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    /// One request/response exchange; returns the raw message content.
    fn request_once(&self, prompt: &str) -> Result<String, SamplerError> {
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": SYSTEM_MESSAGE},
                {"role": "user", "content": prompt},
            ],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        });
        let _slot = self.gate.acquire();
        let resp = self
            .client
            .post(&self.url)
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| SamplerError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| SamplerError::Transport(e.to_string()))?;
        if !status.is_success() {
            let mut body = text;
            body.truncate(512);
            return Err(SamplerError::Status {
                status: status.as_u16(),
                body,
            });
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| SamplerError::MalformedResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| SamplerError::MalformedResponse("no message content".into()))
    }

    /// Sends the prompt, retrying any failure up to `retries` more times.
    pub fn llm_sample(&self, prompt: &str) -> Result<Sample, SamplerError> {
        let started = Instant::now();
        let attempts = self.config.retries + 1;
        let mut last = None;
        for attempt in 0..attempts {
            match self.request_once(prompt) {
                Ok(content) => {
                    return Ok(Sample {
                        source: extract_program(&content),
                        sampling_time: started.elapsed(),
                        retries: attempt,
                    })
                }
                Err(e) => last = Some(e),
            }
        }
        Err(SamplerError::Exhausted {
            attempts,
            last: Box::new(last.expect("at least one attempt")),
        })
    }
}

impl Sampler for LlmSampler {
    fn name(&self) -> &'static str {
        "llm"
    }

    fn sample(&self, prompt: &Prompt, _rng: &mut SearchRng) -> Result<Sample, SamplerError> {
        self.llm_sample(&prompt.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = LlmConfig::default();
        assert!(c.validate().is_ok());
        c.timeout_secs = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn key_not_serialized() {
        let c = LlmConfig {
            api_key: "secret".into(),
            ..LlmConfig::default()
        };
        assert!(!serde_json::to_string(&c).unwrap().contains("secret"));
    }
}
