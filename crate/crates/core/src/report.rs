//! Result document shared by program search and the GA baseline.
//!
//! Everything in [`SearchReport`]'s JSON form is a deterministic function of
//! the inputs and seed. Wall-clock measurements live in [`TimingSummary`],
//! which is serialized separately.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dispatch::DispatchMatrix;
use crate::evaluate::ScheduleEvaluation;
use crate::instance::{CommitmentMatrix, UcInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub units: usize,
    pub periods: usize,
    pub demand_min: f64,
    pub demand_max: f64,
    pub total_capacity: f64,
}

impl InstanceSummary {
    pub fn of(instance: &UcInstance) -> Self {
        let demand_min = instance
            .demand
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let demand_max = instance
            .demand
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        InstanceSummary {
            units: instance.num_units(),
            periods: instance.num_periods(),
            demand_min,
            demand_max,
            total_capacity: instance.total_capacity(),
        }
    }
}

/// The best schedule a run found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSolution {
    /// Program source; absent for the GA, which evolves schedules directly.
    pub program: Option<String>,
    pub score: f64,
    /// Sample index (program search) or generation (GA) that produced it.
    pub generation: usize,
    pub island: Option<usize>,
    pub evaluation: ScheduleEvaluation,
    pub commitment: CommitmentMatrix,
    pub dispatch: DispatchMatrix,
    pub demand: Vec<f64>,
    pub total_generation: Vec<f64>,
}

impl BestSolution {
    pub fn new(
        instance: &UcInstance,
        program: Option<String>,
        generation: usize,
        island: Option<usize>,
        commitment: CommitmentMatrix,
        dispatch: DispatchMatrix,
        evaluation: ScheduleEvaluation,
    ) -> Self {
        BestSolution {
            program,
            score: evaluation.total_cost,
            generation,
            island,
            total_generation: dispatch.total_generation(),
            demand: instance.demand.clone(),
            evaluation,
            commitment,
            dispatch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    /// `funsearch` or `ga`.
    pub approach: String,
    pub sampler: Option<String>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub instance: InstanceSummary,
    /// Candidates produced and evaluated.
    pub samples: usize,
    pub discarded: usize,
    pub discard_reasons: BTreeMap<String, usize>,
    /// `None` when no candidate produced a finite score.
    pub best: Option<BestSolution>,
    /// Best score seen after each sample; `null` until the first success.
    pub trajectory: Vec<Option<f64>>,
    #[serde(skip)]
    pub timing: TimingSummary,
}

impl SearchReport {
    pub fn best_score(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.score)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Accumulated wall-clock time, reported in seconds at microsecond resolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimingSummary {
    pub samples: usize,
    pub sampling: Duration,
    pub evaluation: Duration,
}

impl TimingSummary {
    pub fn record(&mut self, sampling: Duration, evaluation: Duration) {
        self.samples += 1;
        self.sampling += sampling;
        self.evaluation += evaluation;
    }

    pub fn merge(&mut self, other: &TimingSummary) {
        self.samples += other.samples;
        self.sampling += other.sampling;
        self.evaluation += other.evaluation;
    }

    fn mean(total: Duration, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            total.as_secs_f64() / n as f64
        }
    }

    pub fn mean_sampling_secs(&self) -> f64 {
        Self::mean(self.sampling, self.samples)
    }

    pub fn mean_evaluation_secs(&self) -> f64 {
        Self::mean(self.evaluation, self.samples)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let us = |secs: f64| (secs * 1e6).round() / 1e6;
        serde_json::json!({
            "samples": self.samples,
            "total_sampling_time_s": us(self.sampling.as_secs_f64()),
            "total_evaluation_time_s": us(self.evaluation.as_secs_f64()),
            "mean_sampling_time_s": us(self.mean_sampling_secs()),
            "mean_evaluation_time_s": us(self.mean_evaluation_secs()),
        })
    }
}
