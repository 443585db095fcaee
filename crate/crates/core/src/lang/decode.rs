//! Priority-list decoding of a program into a commitment schedule.

use std::time::Instant;

use thiserror::Error;

use super::interp::{eval, Budget, EvalError, FeatureContext, DEFAULT_NODE_BUDGET};
use super::HeuristicProgram;
use crate::instance::{CommitmentMatrix, RunState, UcInstance};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DecodeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("decode exceeded its time limit")]
    TimeLimit,
}

#[derive(Debug, Clone, Copy)]
pub struct DecodeLimits {
    pub node_budget: u64,
    /// Checked between periods.
    pub deadline: Option<Instant>,
}

impl Default for DecodeLimits {
    fn default() -> Self {
        DecodeLimits {
            node_budget: DEFAULT_NODE_BUDGET,
            deadline: None,
        }
    }
}

pub fn decode(
    instance: &UcInstance,
    program: &HeuristicProgram,
) -> Result<CommitmentMatrix, DecodeError> {
    decode_with(instance, program, DecodeLimits::default())
}

/// Builds a schedule period by period. Units whose current run is younger than
/// its minimum keep their state; the remaining units are ranked by the
/// program's score (highest first, ties by lower id) and switched on in that
/// order until committed capacity covers demand.
pub fn decode_with(
    instance: &UcInstance,
    program: &HeuristicProgram,
    limits: DecodeLimits,
) -> Result<CommitmentMatrix, DecodeError> {
    let (n, periods) = (instance.num_units(), instance.num_periods());
    let mut out = CommitmentMatrix::all_off(n, periods);
    let mut states: Vec<RunState> = instance.units.iter().map(RunState::initial).collect();
    let mut budget = Budget(limits.node_budget);
    let mut free: Vec<(usize, f64)> = Vec::with_capacity(n);

    for (t, &demand) in instance.demand.iter().enumerate() {
        if limits.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(DecodeError::TimeLimit);
        }
        free.clear();
        let mut capacity = 0.0;
        for (i, unit) in instance.units.iter().enumerate() {
            match states[i].locked(unit) {
                Some(true) => {
                    out.set(i, t, true);
                    capacity += unit.p_max;
                }
                Some(false) => {}
                None => free.push((i, 0.0)),
            }
        }
        let residual = demand - capacity;
        for (i, score) in free.iter_mut() {
            let unit = &instance.units[*i];
            let ctx = FeatureContext {
                cost_rate: unit.cost_rate,
                p_min: unit.p_min,
                p_max: unit.p_max,
                min_up: f64::from(unit.min_up),
                min_down: f64::from(unit.min_down),
                demand,
                residual_demand: residual,
                hours_in_state: f64::from(states[*i].duration),
                is_on: if states[*i].on { 1.0 } else { 0.0 },
                t: t as f64,
                horizon: periods as f64,
                units: n as f64,
            };
            *score = eval(program.ast(), &ctx, &mut budget)?;
        }
        free.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(i, _) in &free {
            if capacity >= demand {
                break;
            }
            out.set(i, t, true);
            capacity += instance.units[i].p_max;
        }
        for (i, state) in states.iter_mut().enumerate() {
            state.advance(out.is_on(i, t));
        }
    }
    Ok(out)
}
