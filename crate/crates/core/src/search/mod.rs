//! Evolutionary program search: prompt a sampler with the best programs of an
//! island, score what comes back, and keep the survivors.

mod database;
mod prompt;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use database::{ProgramDatabase, ProgramRecord, Registration};
pub use prompt::build_prompt;

use crate::dispatch::{dispatch, DispatchMatrix};
use crate::evaluate::{evaluate, ScheduleEvaluation};
use crate::instance::{CommitmentMatrix, UcInstance};
use crate::lang::{
    decode_with, DecodeError, DecodeLimits, EvalError, HeuristicProgram, DEFAULT_NODE_BUDGET,
};
use crate::report::{BestSolution, InstanceSummary, SearchReport, TimingSummary};
use crate::sampler::{Prompt, Sampler, SamplerError, SearchRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub max_samples: usize,
    pub islands: usize,
    pub island_capacity: usize,
    /// Programs shown per prompt.
    pub prompt_k: usize,
    pub time_limit_secs: f64,
    pub node_budget: u64,
    /// Samples between resets of the worst island; `None` disables resets.
    pub reset_interval: Option<usize>,
    pub seed: u64,
    /// Threads sampling and scoring each round. Results do not depend on it,
    /// so it is left out of reports.
    #[serde(skip_serializing)]
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_samples: 1000,
            islands: 4,
            island_capacity: 64,
            prompt_k: 2,
            time_limit_secs: 5.0,
            node_budget: DEFAULT_NODE_BUDGET,
            reset_interval: None,
            seed: 0,
            workers: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.islands == 0 || self.island_capacity == 0 || self.prompt_k == 0 {
            return bad("islands, island_capacity and prompt_k must be positive");
        }
        if self.prompt_k > self.island_capacity {
            return bad("prompt_k must not exceed island_capacity");
        }
        if !(self.time_limit_secs.is_finite() && self.time_limit_secs > 0.0) {
            return bad("time limit must be positive");
        }
        if self.node_budget == 0 || self.workers == 0 {
            return bad("node_budget and workers must be positive");
        }
        if self.reset_interval == Some(0) {
            return bad("reset_interval must be positive");
        }
        Ok(())
    }

    pub fn limits(&self) -> CandidateLimits {
        CandidateLimits {
            time_limit: Duration::from_secs_f64(self.time_limit_secs),
            node_budget: self.node_budget,
        }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("sampler failed at sample {sample}")]
    Sampler {
        sample: usize,
        #[source]
        source: SamplerError,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct CandidateLimits {
    pub time_limit: Duration,
    pub node_budget: u64,
}

impl Default for CandidateLimits {
    fn default() -> Self {
        SearchConfig::default().limits()
    }
}

/// Why a candidate was dropped without a score.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscardReason {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("numeric domain: {0}")]
    NumericDomain(String),
    #[error("node budget exhausted")]
    BudgetExhausted,
    #[error("time limit exceeded")]
    TimeLimit,
    #[error("non-finite score")]
    NonFiniteScore,
}

impl DiscardReason {
    pub fn label(&self) -> &'static str {
        match self {
            DiscardReason::Syntax(_) => "syntax",
            DiscardReason::NumericDomain(_) => "numeric_domain",
            DiscardReason::BudgetExhausted => "budget",
            DiscardReason::TimeLimit => "time_limit",
            DiscardReason::NonFiniteScore => "non_finite",
        }
    }
}

/// A candidate that made it through the whole pipeline.
#[derive(Debug, Clone)]
pub struct ScoredCandidate {
    pub program: HeuristicProgram,
    pub commitment: CommitmentMatrix,
    pub dispatch: DispatchMatrix,
    pub evaluation: ScheduleEvaluation,
    pub evaluation_time: Duration,
}

impl ScoredCandidate {
    pub fn score(&self) -> f64 {
        self.evaluation.total_cost
    }
}

/// Parse, decode, dispatch and evaluate one program source.
pub fn evaluate_candidate(
    instance: &UcInstance,
    source: &str,
    limits: &CandidateLimits,
) -> Result<ScoredCandidate, DiscardReason> {
    let started = Instant::now();
    let program =
        HeuristicProgram::parse(source).map_err(|e| DiscardReason::Syntax(e.to_string()))?;
    let decode_limits = DecodeLimits {
        node_budget: limits.node_budget,
        deadline: Some(started + limits.time_limit),
    };
    let commitment = decode_with(instance, &program, decode_limits).map_err(|e| match e {
        DecodeError::Eval(EvalError::NumericDomain(m)) => DiscardReason::NumericDomain(m),
        DecodeError::Eval(EvalError::BudgetExhausted) => DiscardReason::BudgetExhausted,
        DecodeError::TimeLimit => DiscardReason::TimeLimit,
    })?;
    let dispatch = dispatch(instance, &commitment);
    let evaluation =
        evaluate(instance, &commitment, &dispatch).expect("decoded schedule matches instance");
    let evaluation_time = started.elapsed();
    if evaluation_time > limits.time_limit {
        return Err(DiscardReason::TimeLimit);
    }
    if !evaluation.total_cost.is_finite() {
        return Err(DiscardReason::NonFiniteScore);
    }
    Ok(ScoredCandidate {
        program,
        commitment,
        dispatch,
        evaluation,
        evaluation_time,
    })
}

/// Generator for sample `index`; independent of scheduling order.
fn sample_rng(seed: u64, index: usize) -> SearchRng {
    let mut rng = SearchRng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Outcome of one sample, produced on a worker thread.
struct Drawn {
    sampling_time: Duration,
    outcome: Result<(String, ScoredCandidate), DiscardReason>,
}

/// Runs the search until `max_samples` candidates have been drawn.
///
/// Samples are taken in rounds of one per island. Every prompt in a round is
/// built from the database as it stood when the round began, the round is
/// sampled and scored in parallel, and results are registered in sample
/// order. The report is therefore identical for any worker count.
pub fn run_search(
    instance: &UcInstance,
    sampler: &dyn Sampler,
    config: &SearchConfig,
) -> Result<SearchReport, SearchError> {
    config.validate()?;
    let summary = InstanceSummary::of(instance);
    let limits = config.limits();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| SearchError::InvalidConfig(e.to_string()))?;
    let mut db = ProgramDatabase::new(config.islands, config.island_capacity);
    let mut best: Option<(usize, ScoredCandidate, usize)> = None;
    let mut trajectory = Vec::with_capacity(config.max_samples);
    let mut discards: BTreeMap<String, usize> = BTreeMap::new();
    let mut timing = TimingSummary::default();

    let draw = |idx: usize, prompt: &Prompt| -> Result<Drawn, SearchError> {
        let mut rng = sample_rng(config.seed, idx);
        let sample = sampler
            .sample(prompt, &mut rng)
            .map_err(|source| SearchError::Sampler {
                sample: idx,
                source,
            })?;
        let outcome =
            evaluate_candidate(instance, &sample.source, &limits).map(|cand| (sample.source, cand));
        Ok(Drawn {
            sampling_time: sample.sampling_time,
            outcome,
        })
    };

    let mut round_start = 0;
    while round_start < config.max_samples {
        let round_end = (round_start + config.islands).min(config.max_samples);
        if let Some(every) = config.reset_interval {
            if let Some(k) = (round_start..round_end).find(|&i| i > 0 && i % every == 0) {
                let mut rng = sample_rng(config.seed, usize::MAX - k);
                db.reset_worst(&mut rng);
            }
        }
        let prompts: Vec<(usize, Prompt)> = (round_start..round_end)
            .map(|idx| {
                (
                    idx,
                    build_prompt(&db, &summary, idx % config.islands, config.prompt_k),
                )
            })
            .collect();
        let drawn: Vec<Result<Drawn, SearchError>> = if config.workers == 1 {
            prompts.iter().map(|(idx, p)| draw(*idx, p)).collect()
        } else {
            pool.install(|| prompts.par_iter().map(|(idx, p)| draw(*idx, p)).collect())
        };
        for ((idx, _), result) in prompts.iter().zip(drawn) {
            let (idx, island) = (*idx, idx % config.islands);
            let drawn = result?;
            match drawn.outcome {
                Ok((source, cand)) => {
                    timing.record(drawn.sampling_time, cand.evaluation_time);
                    let score = cand.score();
                    db.register(ProgramRecord {
                        source,
                        normalized: cand.program.normalized(),
                        score,
                        evaluation_time: cand.evaluation_time,
                        sampling_time: drawn.sampling_time,
                        generation: idx,
                        island,
                    });
                    if best.as_ref().is_none_or(|(_, b, _)| score < b.score()) {
                        best = Some((idx, cand, island));
                    }
                }
                Err(reason) => {
                    timing.record(drawn.sampling_time, Duration::ZERO);
                    *discards.entry(reason.label().to_string()).or_default() += 1;
                }
            }
            trajectory.push(best.as_ref().map(|(_, b, _)| b.score()));
        }
        round_start = round_end;
    }

    let discarded = discards.values().sum();
    let best = best.map(|(idx, cand, island)| {
        BestSolution::new(
            instance,
            Some(cand.program.source().to_string()),
            idx,
            Some(island),
            cand.commitment,
            cand.dispatch,
            cand.evaluation,
        )
    });
    Ok(SearchReport {
        approach: "funsearch".into(),
        sampler: Some(sampler.name().into()),
        seed: config.seed,
        config: serde_json::to_value(config).expect("config serializes"),
        instance: summary,
        samples: config.max_samples,
        discarded,
        discard_reasons: discards,
        best,
        trajectory,
        timing,
    })
}
