//! Run settings: defaults, then an optional JSON file, then command-line flags.

use std::path::Path;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde_json::{Map, Value};
use ucsearch::sampler::LlmConfig;
use ucsearch::{GaConfig, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    /// Offline random edits of the prompt's programs; deterministic
    Mutate,
    /// Chat-completion endpoint; needs UC_LLM_API_KEY
    Llm,
}

/// Search and sampler settings shared by `evolve` and `compare`.
#[derive(Debug, Clone, Args)]
pub struct SearchFlags {
    #[arg(long, value_enum, default_value_t = SamplerKind::Mutate)]
    pub sampler: SamplerKind,
    /// JSON settings file: a bare settings object or a previous report. Flags win.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub islands: Option<usize>,
    #[arg(long)]
    pub island_capacity: Option<usize>,
    /// Programs shown in each prompt
    #[arg(long)]
    pub prompt_k: Option<usize>,
    /// Seconds allowed to score one candidate
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Samples between resets of the worst island
    #[arg(long)]
    pub reset_interval: Option<usize>,
    /// Base URL of the chat-completion API
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    /// Request timeout in seconds
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub retries: Option<u32>,
    /// Concurrent requests allowed
    #[arg(long)]
    pub max_in_flight: Option<usize>,
}

/// Overwrites `target` when the flag was given.
macro_rules! set {
    ($target:expr, $flag:expr) => {
        if let Some(v) = $flag.clone() {
            $target = v;
        }
    };
}

pub fn logical_cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Reads a settings object. A report is accepted in place of bare settings,
/// in which case its embedded `config` is used.
fn settings_object(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading settings file {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing settings file {}", path.display()))?;
    let value = match value {
        Value::Object(mut obj) if obj.contains_key("approach") && obj.contains_key("config") => {
            obj.remove("config").unwrap_or(Value::Null)
        }
        other => other,
    };
    match value {
        Value::Object(obj) => Ok(obj),
        _ => anyhow::bail!("settings file {} is not a JSON object", path.display()),
    }
}

pub struct SearchSettings {
    pub search: SearchConfig,
    pub llm: LlmConfig,
}

pub fn search_settings(
    flags: &SearchFlags,
    samples: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<SearchSettings> {
    let (mut search, mut llm, file_workers) = match &flags.config {
        None => (SearchConfig::default(), LlmConfig::default(), false),
        Some(path) => {
            let mut obj = settings_object(path)?;
            let llm = match obj.remove("llm") {
                Some(v) => serde_json::from_value(v).context("invalid llm settings")?,
                None => LlmConfig::default(),
            };
            let has_workers = obj.contains_key("workers");
            let search =
                serde_json::from_value(Value::Object(obj)).context("invalid search settings")?;
            (search, llm, has_workers)
        }
    };
    if !file_workers {
        search.workers = logical_cores();
    }
    set!(search.max_samples, samples);
    set!(search.seed, seed);
    set!(search.workers, workers);
    set!(search.islands, flags.islands);
    set!(search.island_capacity, flags.island_capacity);
    set!(search.prompt_k, flags.prompt_k);
    set!(search.time_limit_secs, flags.time_limit);
    if flags.reset_interval.is_some() {
        search.reset_interval = flags.reset_interval;
    }
    set!(llm.endpoint, flags.endpoint);
    set!(llm.model, flags.model);
    set!(llm.temperature, flags.temperature);
    set!(llm.max_tokens, flags.max_tokens);
    set!(llm.timeout_secs, flags.timeout);
    set!(llm.retries, flags.retries);
    set!(llm.max_in_flight, flags.max_in_flight);
    search.validate()?;
    Ok(SearchSettings { search, llm })
}

#[derive(Debug, Clone, Args)]
pub struct GaFlags {
    /// JSON settings file: a bare settings object or a previous GA report. Flags win.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub tournament: Option<usize>,
    #[arg(long)]
    pub crossover_prob: Option<f64>,
    /// Per-bit flip probability (default 1/(units*periods))
    #[arg(long)]
    pub mutation_prob: Option<f64>,
    #[arg(long)]
    pub elitism: Option<usize>,
}

pub fn ga_settings(
    flags: &GaFlags,
    evaluations: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<GaConfig> {
    let (mut ga, file_workers) = match &flags.config {
        None => (GaConfig::default(), false),
        Some(path) => {
            let obj = settings_object(path)?;
            let has_workers = obj.contains_key("workers");
            let ga = serde_json::from_value(Value::Object(obj)).context("invalid GA settings")?;
            (ga, has_workers)
        }
    };
    if !file_workers {
        ga.workers = logical_cores();
    }
    set!(ga.population, flags.population);
    set!(ga.generations, flags.generations);
    set!(ga.tournament, flags.tournament);
    set!(ga.crossover_prob, flags.crossover_prob);
    set!(ga.elitism, flags.elitism);
    set!(ga.seed, seed);
    set!(ga.workers, workers);
    if flags.mutation_prob.is_some() {
        ga.mutation_prob = flags.mutation_prob;
    }
    if evaluations.is_some() {
        ga.max_evaluations = evaluations;
    }
    ga.validate()?;
    Ok(ga)
}
