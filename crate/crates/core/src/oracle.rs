//! Exhaustive search over every commitment matrix of a tiny instance.
//!
//! Dispatch is exactly optimal for a fixed commitment under linear costs, so
//! enumerating commitments alone yields the global optimum.

use rayon::prelude::*;
use thiserror::Error;

use crate::dispatch::{dispatch_with_order, merit_order, DispatchMatrix};
use crate::evaluate::{evaluate, ScheduleEvaluation};
use crate::instance::{CommitmentMatrix, UcInstance};

pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 24;

/// Codes per parallel chunk.
const CHUNK: u64 = 1 << 12;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("instance needs 2^{bits} enumerations, limit is {limit}")]
pub struct TooLarge {
    pub bits: usize,
    pub limit: u64,
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub commitment: CommitmentMatrix,
    pub dispatch: DispatchMatrix,
    pub evaluation: ScheduleEvaluation,
}

/// The first flattened entry is the most significant bit, so numeric order of
/// codes is lexicographic order of matrices.
fn decode_code(code: u64, units: usize, periods: usize) -> CommitmentMatrix {
    let bits = units * periods;
    let flat = (0..bits)
        .map(|k| (code >> (bits - 1 - k)) & 1 == 1)
        .collect();
    CommitmentMatrix::from_flat(units, periods, flat)
}

/// Minimum total cost over all 2^(N·T) commitments; ties go to the
/// lexicographically smallest flattened matrix.
pub fn solve_exhaustive(instance: &UcInstance, limit: u64) -> Result<OracleSolution, TooLarge> {
    let (n, t) = (instance.num_units(), instance.num_periods());
    let bits = n * t;
    if bits >= 64 || (1u64 << bits) > limit {
        return Err(TooLarge { bits, limit });
    }
    let total = 1u64 << bits;
    let order = merit_order(instance);
    let cost_of = |code: u64| {
        let m = decode_code(code, n, t);
        let d = dispatch_with_order(instance, &m, &order);
        evaluate(instance, &m, &d)
            .expect("shape matches")
            .total_cost
    };
    let better = |a: (f64, u64), b: (f64, u64)| {
        if a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).is_le() {
            a
        } else {
            b
        }
    };
    let chunks = total.div_ceil(CHUNK);
    let (_, code) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            (lo..hi)
                .map(|code| (cost_of(code), code))
                .reduce(better)
                .expect("non-empty chunk")
        })
        .reduce(|| (f64::INFINITY, u64::MAX), better);

    let commitment = decode_code(code, n, t);
    let dispatch = dispatch_with_order(instance, &commitment, &order);
    let evaluation = evaluate(instance, &commitment, &dispatch).expect("shape matches");
    Ok(OracleSolution {
        commitment,
        dispatch,
        evaluation,
    })
}
