//! Penalty-based schedule scoring.
//!
//! Total cost is operating cost plus a per-MW penalty on unmet demand plus a
//! per-period penalty on every on/off run that ends before its minimum
//! duration. A feasibility report lists every constraint breach, including
//! over-generation, which carries no cost.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispatch::DispatchMatrix;
use crate::instance::{CommitmentMatrix, UcInstance};

/// $ per MW of unmet demand.
pub const DEMAND_PENALTY_PER_MW: f64 = 1e4;
/// $ per period a run falls short of its minimum duration.
pub const MIN_TIME_PENALTY_PER_PERIOD: f64 = 1e5;

/// Absolute slack (scaled by magnitude) below which a balance or bound
/// residual is treated as rounding noise.
const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvaluationError {
    #[error("{what} is {rows}x{cols}, instance is {units}x{periods}")]
    Dimension {
        what: &'static str,
        rows: usize,
        cols: usize,
        units: usize,
        periods: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub demand_per_mw: f64,
    pub min_time_per_period: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        PenaltyWeights {
            demand_per_mw: DEMAND_PENALTY_PER_MW,
            min_time_per_period: MIN_TIME_PENALTY_PER_PERIOD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Dispatched output below demand.
    DemandShortfall,
    /// Dispatched output above demand (minimum outputs exceed load).
    OverGeneration,
    MinUpTime,
    MinDownTime,
    /// Output outside [p_min, p_max] for a committed unit, or nonzero when off.
    OutputBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<usize>,
    /// Period of the breach; for run-length breaches, the first period of the run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    /// MW for balance and bound breaches, missing periods for run-length breaches.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEvaluation {
    pub operating_cost: f64,
    pub demand_penalty: f64,
    pub min_time_penalty: f64,
    pub total_cost: f64,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// A maximal constant-state run of one unit inside the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSegment {
    pub unit: usize,
    pub on: bool,
    pub start: usize,
    /// Periods inside the horizon.
    pub length: usize,
    /// Length including the pre-horizon run when this is the first segment and
    /// it continues the initial state.
    pub effective_length: usize,
    /// Position of the run within the unit's segment list.
    pub ordinal: usize,
}

/// Splits each unit's row into maximal constant-state runs.
pub fn segments(instance: &UcInstance, commitment: &CommitmentMatrix) -> Vec<Vec<RunSegment>> {
    (0..commitment.num_units())
        .map(|i| unit_segments(instance, commitment, i))
        .collect()
}

fn unit_segments(
    instance: &UcInstance,
    commitment: &CommitmentMatrix,
    i: usize,
) -> Vec<RunSegment> {
    let row = commitment.row(i);
    let unit = &instance.units[i];
    let mut out: Vec<RunSegment> = Vec::new();
    let mut start = 0;
    for t in 1..=row.len() {
        if t == row.len() || row[t] != row[start] {
            let length = t - start;
            let effective_length = if start == 0 && row[0] == unit.initial_state {
                length + unit.initial_duration() as usize
            } else {
                length
            };
            out.push(RunSegment {
                unit: i,
                on: row[start],
                start,
                length,
                effective_length,
                ordinal: out.len(),
            });
            start = t;
        }
    }
    out
}

/// Scores a dispatched schedule with the default penalty weights.
pub fn evaluate(
    instance: &UcInstance,
    commitment: &CommitmentMatrix,
    dispatch: &DispatchMatrix,
) -> Result<ScheduleEvaluation, EvaluationError> {
    evaluate_with(instance, commitment, dispatch, &PenaltyWeights::default())
}

pub fn evaluate_with(
    instance: &UcInstance,
    commitment: &CommitmentMatrix,
    dispatch: &DispatchMatrix,
    weights: &PenaltyWeights,
) -> Result<ScheduleEvaluation, EvaluationError> {
    let (n, periods) = (instance.num_units(), instance.num_periods());
    let dim_err = |what, rows, cols| EvaluationError::Dimension {
        what,
        rows,
        cols,
        units: n,
        periods,
    };
    if commitment.num_units() != n || commitment.num_periods() != periods {
        return Err(dim_err(
            "commitment",
            commitment.num_units(),
            commitment.num_periods(),
        ));
    }
    if dispatch.num_units() != n || dispatch.rows().iter().any(|r| r.len() != periods) {
        return Err(dim_err(
            "dispatch",
            dispatch.num_units(),
            dispatch.num_periods(),
        ));
    }

    let mut violations = Vec::new();
    let mut operating_cost = 0.0;
    let mut shortfall_total = 0.0;

    for (t, &demand) in instance.demand.iter().enumerate() {
        let mut served = 0.0;
        for (i, unit) in instance.units.iter().enumerate() {
            let p = dispatch.power(i, t);
            if commitment.is_on(i, t) {
                operating_cost += unit.cost_rate * p * instance.period_hours;
                served += p;
                let slack = TOLERANCE * unit.p_max.max(1.0);
                if p < unit.p_min - slack || p > unit.p_max + slack {
                    let breach = if p < unit.p_min {
                        unit.p_min - p
                    } else {
                        p - unit.p_max
                    };
                    violations.push(Violation {
                        kind: ViolationKind::OutputBounds,
                        unit: Some(i),
                        period: Some(t),
                        magnitude: breach,
                    });
                }
            } else if p.abs() > TOLERANCE {
                violations.push(Violation {
                    kind: ViolationKind::OutputBounds,
                    unit: Some(i),
                    period: Some(t),
                    magnitude: p.abs(),
                });
            }
        }
        let slack = TOLERANCE * demand.max(1.0);
        let gap = demand - served;
        if gap > slack {
            shortfall_total += gap;
            violations.push(Violation {
                kind: ViolationKind::DemandShortfall,
                unit: None,
                period: Some(t),
                magnitude: gap,
            });
        } else if -gap > slack {
            violations.push(Violation {
                kind: ViolationKind::OverGeneration,
                unit: None,
                period: Some(t),
                magnitude: -gap,
            });
        }
    }

    let mut missing_periods: u64 = 0;
    for i in 0..n {
        let unit = &instance.units[i];
        let segs = unit_segments(instance, commitment, i);
        let kind_for = |on: bool| {
            if on {
                ViolationKind::MinUpTime
            } else {
                ViolationKind::MinDownTime
            }
        };
        // A state change at period 0 closes the pre-horizon run.
        let row0 = commitment.is_on(i, 0);
        if row0 != unit.initial_state {
            let required = unit.min_duration(unit.initial_state);
            let had = unit.initial_duration();
            if had < required {
                missing_periods += u64::from(required - had);
                violations.push(Violation {
                    kind: kind_for(unit.initial_state),
                    unit: Some(i),
                    period: Some(0),
                    magnitude: f64::from(required - had),
                });
            }
        }
        // The last run continues past the horizon and is never penalized.
        for seg in &segs[..segs.len() - 1] {
            let required = unit.min_duration(seg.on) as usize;
            if seg.effective_length < required {
                let short = required - seg.effective_length;
                missing_periods += short as u64;
                violations.push(Violation {
                    kind: kind_for(seg.on),
                    unit: Some(i),
                    period: Some(seg.start),
                    magnitude: short as f64,
                });
            }
        }
    }

    let demand_penalty = weights.demand_per_mw * shortfall_total;
    let min_time_penalty = weights.min_time_per_period * missing_periods as f64;
    Ok(ScheduleEvaluation {
        operating_cost,
        demand_penalty,
        min_time_penalty,
        total_cost: operating_cost + demand_penalty + min_time_penalty,
        feasible: violations.is_empty(),
        violations,
    })
}
