//! Candidate-program generators behind one contract.

mod llm;
mod mutate;

use std::time::Duration;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use llm::{LlmConfig, LlmSampler, API_KEY_ENV};
pub use mutate::{mutate_once, mutation_sample, MutationOp, MutationSampler};

/// Seeded generator used for every random choice in search and sampling.
pub type SearchRng = ChaCha8Rng;

pub const PROGRAM_OPEN: &str = "<program>";
pub const PROGRAM_CLOSE: &str = "</program>";

/// What a sampler is asked to improve on.
#[derive(Debug, Clone, PartialEq)]
pub struct Prompt {
    pub text: String,
    /// Source of the example programs shown in `text`, worst to best.
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub source: String,
    pub sampling_time: Duration,
    /// Failed attempts before the one that succeeded.
    pub retries: u32,
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("sampler configuration: {0}")]
    Config(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no parseable parent program")]
    NoParseableParent,
    #[error("gave up after {attempts} attempts")]
    Exhausted {
        attempts: u32,
        #[source]
        last: Box<SamplerError>,
    },
}

pub trait Sampler: Send + Sync {
    fn name(&self) -> &'static str;

    fn sample(&self, prompt: &Prompt, rng: &mut SearchRng) -> Result<Sample, SamplerError>;
}

/// Text between the program delimiters, or the whole response when they are
/// absent. A missing closing tag takes everything after the opening one.
pub fn extract_program(response: &str) -> String {
    match response.find(PROGRAM_OPEN) {
        Some(open) => {
            let body = &response[open + PROGRAM_OPEN.len()..];
            let body = body
                .find(PROGRAM_CLOSE)
                .map_or(body, |close| &body[..close]);
            body.trim().to_string()
        }
        None => response.trim().to_string(),
    }
}
