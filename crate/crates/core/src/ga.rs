//! Genetic algorithm over binary commitment matrices, used as the baseline.
//!
//! Genomes are flattened unit-major N·T bit strings. Every individual is
//! repaired to honor minimum up/down times before it is dispatched and scored
//! with the same evaluator as program search.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispatch::{dispatch_with_order, merit_order, DispatchMatrix};
use crate::evaluate::{evaluate, ScheduleEvaluation};
use crate::instance::{CommitmentMatrix, RunState, UcInstance};
use crate::report::{BestSolution, InstanceSummary, SearchReport, TimingSummary};
use crate::sampler::SearchRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_prob: f64,
    /// Per-bit flip probability; `None` means 1/(N·T).
    pub mutation_prob: Option<f64>,
    pub elitism: usize,
    /// Hard cap on evaluated individuals, for budget-matched comparisons.
    pub max_evaluations: Option<usize>,
    pub seed: u64,
    /// Scoring threads; results do not depend on it, so reports omit it.
    #[serde(skip_serializing)]
    pub workers: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 100,
            generations: 200,
            tournament: 3,
            crossover_prob: 0.9,
            mutation_prob: None,
            elitism: 2,
            max_evaluations: None,
            seed: 0,
            workers: 1,
        }
    }
}

#[derive(Debug, Error)]
#[error("invalid GA configuration: {0}")]
pub struct GaConfigError(String);

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaConfigError> {
        let bad = |m: &str| Err(GaConfigError(m.into()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.tournament == 0 || self.workers == 0 {
            return bad("tournament size and workers must be positive");
        }
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !prob_ok(self.crossover_prob) || !self.mutation_prob.is_none_or(prob_ok) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.elitism > self.population {
            return bad("elitism exceeds population");
        }
        Ok(())
    }
}

/// Sweeps each unit left to right and overrides any switch that would end a
/// run before its minimum duration, starting from the initial conditions.
pub fn repair(instance: &UcInstance, commitment: &CommitmentMatrix) -> CommitmentMatrix {
    let mut out = commitment.clone();
    for (i, unit) in instance.units.iter().enumerate() {
        let mut state = RunState::initial(unit);
        for t in 0..out.num_periods() {
            let on = state.locked(unit).unwrap_or(out.is_on(i, t));
            out.set(i, t, on);
            state.advance(on);
        }
    }
    out
}

#[derive(Clone)]
struct Individual {
    genome: Vec<bool>,
    score: f64,
}

struct Scored {
    commitment: CommitmentMatrix,
    dispatch: DispatchMatrix,
    evaluation: ScheduleEvaluation,
}

struct Evaluator<'a> {
    instance: &'a UcInstance,
    order: Vec<usize>,
}

impl Evaluator<'_> {
    fn score(&self, genome: &[bool]) -> (f64, Duration) {
        let started = Instant::now();
        let s = self.full(genome).evaluation.total_cost;
        (s, started.elapsed())
    }

    fn full(&self, genome: &[bool]) -> Scored {
        let (n, t) = (self.instance.num_units(), self.instance.num_periods());
        let commitment = CommitmentMatrix::from_flat(n, t, genome.to_vec());
        let dispatch = dispatch_with_order(self.instance, &commitment, &self.order);
        let evaluation =
            evaluate(self.instance, &commitment, &dispatch).expect("genome matches instance shape");
        Scored {
            commitment,
            dispatch,
            evaluation,
        }
    }
}

fn by_score(a: &Individual, b: &Individual) -> Ordering {
    a.score.total_cmp(&b.score)
}

fn tournament<'p>(pop: &'p [Individual], size: usize, rng: &mut SearchRng) -> &'p Individual {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..size {
        let challenger = &pop[rng.random_range(0..pop.len())];
        if challenger.score < best.score {
            best = challenger;
        }
    }
    best
}

pub fn run_ga(instance: &UcInstance, config: &GaConfig) -> Result<SearchReport, GaConfigError> {
    config.validate()?;
    let (n, periods) = (instance.num_units(), instance.num_periods());
    let genome_len = n * periods;
    let mutation_prob = config.mutation_prob.unwrap_or(1.0 / genome_len as f64);
    let budget = config.max_evaluations.unwrap_or(usize::MAX);
    let evaluator = Evaluator {
        instance,
        order: merit_order(instance),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| GaConfigError(e.to_string()))?;
    let mut rng = SearchRng::seed_from_u64(config.seed);
    let mut timing = TimingSummary::default();
    let mut trajectory: Vec<Option<f64>> = Vec::new();
    let mut best: Option<(Individual, usize)> = None;

    let repair_genome = |genome: Vec<bool>| -> Vec<bool> {
        let m = CommitmentMatrix::from_flat(n, periods, genome);
        repair(instance, &m).as_flat().to_vec()
    };

    // Scores a batch and folds it into the run history. Returns false once
    // the evaluation budget is spent.
    let mut score_batch = |genomes: Vec<Vec<bool>>,
                           produce_time: Duration,
                           generation: usize,
                           trajectory: &mut Vec<Option<f64>>,
                           best: &mut Option<(Individual, usize)>|
     -> Vec<Individual> {
        let results: Vec<(f64, Duration)> = if config.workers == 1 {
            genomes.iter().map(|g| evaluator.score(g)).collect()
        } else {
            pool.install(|| genomes.par_iter().map(|g| evaluator.score(g)).collect())
        };
        let per_candidate = produce_time / genomes.len().max(1) as u32;
        let mut out = Vec::with_capacity(genomes.len());
        for (genome, (score, eval_time)) in genomes.into_iter().zip(results) {
            timing.record(per_candidate, eval_time);
            let ind = Individual { genome, score };
            if best.as_ref().is_none_or(|(b, _)| ind.score < b.score) {
                *best = Some((ind.clone(), generation));
            }
            trajectory.push(best.as_ref().map(|(b, _)| b.score));
            out.push(ind);
        }
        out
    };

    let started = Instant::now();
    let capacity = instance.total_capacity();
    let mut initial = Vec::with_capacity(config.population);
    for _ in 0..config.population.min(budget) {
        let mut genome = vec![false; genome_len];
        for i in 0..n {
            for (t, &d) in instance.demand.iter().enumerate() {
                let p = if capacity > 0.0 {
                    (d / capacity).min(1.0)
                } else {
                    0.0
                };
                genome[i * periods + t] = rng.random_bool(p);
            }
        }
        initial.push(repair_genome(genome));
    }
    let mut population = score_batch(initial, started.elapsed(), 0, &mut trajectory, &mut best);
    let mut spent = population.len();

    for generation in 1..=config.generations {
        if spent >= budget {
            break;
        }
        let started = Instant::now();
        population.sort_by(by_score);
        let elites = config.elitism.min(population.len());
        let wanted = (config.population - elites).min(budget - spent);
        let mut children = Vec::with_capacity(wanted);
        while children.len() < wanted {
            let a = tournament(&population, config.tournament, &mut rng)
                .genome
                .clone();
            let b = tournament(&population, config.tournament, &mut rng)
                .genome
                .clone();
            let (mut c1, mut c2) = (a, b);
            if genome_len > 1 && rng.random_bool(config.crossover_prob) {
                let cut = rng.random_range(1..genome_len);
                for k in cut..genome_len {
                    std::mem::swap(&mut c1[k], &mut c2[k]);
                }
            }
            for child in [c1, c2] {
                if children.len() == wanted {
                    break;
                }
                let mut child = child;
                for bit in child.iter_mut() {
                    if rng.random_bool(mutation_prob) {
                        *bit = !*bit;
                    }
                }
                children.push(repair_genome(child));
            }
        }
        let scored = score_batch(
            children,
            started.elapsed(),
            generation,
            &mut trajectory,
            &mut best,
        );
        spent += scored.len();
        population.truncate(elites);
        population.extend(scored);
    }

    let best = best.map(|(ind, generation)| {
        let full = evaluator.full(&ind.genome);
        BestSolution::new(
            instance,
            None,
            generation,
            None,
            full.commitment,
            full.dispatch,
            full.evaluation,
        )
    });
    Ok(SearchReport {
        approach: "ga".into(),
        sampler: None,
        seed: config.seed,
        config: serde_json::to_value(config).expect("config serializes"),
        instance: InstanceSummary::of(instance),
        samples: trajectory.len(),
        discarded: 0,
        discard_reasons: Default::default(),
        best,
        trajectory,
        timing,
    })
}
