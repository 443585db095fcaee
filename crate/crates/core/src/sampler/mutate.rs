use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{Prompt, Sample, Sampler, SamplerError, SearchRng};
use crate::lang::{Expr, Feature, Func, HeuristicProgram, MAX_NODES};

const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationOp {
    /// Multiply one literal by a factor drawn from [0.5, 2].
    ScaleLiteral,
    /// Replace one feature reference with a different feature.
    SwapFeature,
    /// Wrap one subtree as `min(sub, c)` or `max(sub, c)` for a fresh literal `c`.
    WrapMinMax,
    /// Replace one subtree with a subtree of a second parent.
    Crossover,
}

/// Offline stand-in for a language model: rewrites one of the prompt's
/// example programs with a single random edit.
#[derive(Debug, Clone, Copy, Default)]
pub struct MutationSampler;

impl Sampler for MutationSampler {
    fn name(&self) -> &'static str {
        "mutate"
    }

    fn sample(&self, prompt: &Prompt, rng: &mut SearchRng) -> Result<Sample, SamplerError> {
        let started = Instant::now();
        let source = mutation_sample(rng, &prompt.parents)?;
        Ok(Sample {
            source,
            sampling_time: started.elapsed(),
            retries: 0,
        })
    }
}

/// Picks a parent uniformly and applies one random mutation. Falls back to
/// the parent text verbatim if ten attempts fail to produce a valid program.
pub fn mutation_sample(rng: &mut SearchRng, parents: &[String]) -> Result<String, SamplerError> {
    let parsed: Vec<(&str, HeuristicProgram)> = parents
        .iter()
        .filter_map(|s| HeuristicProgram::parse(s).ok().map(|p| (s.as_str(), p)))
        .collect();
    if parsed.is_empty() {
        return Err(SamplerError::NoParseableParent);
    }
    let pick = rng.random_range(0..parsed.len());
    let (parent_src, parent) = &parsed[pick];
    for _ in 0..MAX_ATTEMPTS {
        let other = if parsed.len() > 1 {
            let mut k = rng.random_range(0..parsed.len() - 1);
            if k >= pick {
                k += 1;
            }
            Some(parsed[k].1.ast())
        } else {
            None
        };
        let mut ops = vec![MutationOp::WrapMinMax];
        if !parent
            .ast()
            .positions(|e| matches!(e, Expr::Num(_)))
            .is_empty()
        {
            ops.push(MutationOp::ScaleLiteral);
        }
        if !parent
            .ast()
            .positions(|e| matches!(e, Expr::Feature(_)))
            .is_empty()
        {
            ops.push(MutationOp::SwapFeature);
        }
        if other.is_some() {
            ops.push(MutationOp::Crossover);
        }
        let op = *ops.choose(rng).expect("at least one op");
        if let Some(child) = mutate_once(parent.ast(), other, op, rng) {
            if child.node_count() <= MAX_NODES {
                let text = child.to_string();
                if HeuristicProgram::parse(&text).is_ok() {
                    return Ok(text);
                }
            }
        }
    }
    Ok(parent_src.to_string())
}

/// Applies `op` to a copy of `parent`. Returns `None` when the op has no
/// site to act on or produced a non-finite literal.
pub fn mutate_once(
    parent: &Expr,
    other: Option<&Expr>,
    op: MutationOp,
    rng: &mut SearchRng,
) -> Option<Expr> {
    let mut child = parent.clone();
    match op {
        MutationOp::ScaleLiteral => {
            let sites = parent.positions(|e| matches!(e, Expr::Num(_)));
            let site = *sites.choose(rng)?;
            let factor = rng.random_range(0.5..=2.0);
            if let Some(Expr::Num(v)) = child.subtree_mut(site) {
                *v *= factor;
                if !v.is_finite() {
                    return None;
                }
            }
        }
        MutationOp::SwapFeature => {
            let sites = parent.positions(|e| matches!(e, Expr::Feature(_)));
            let site = *sites.choose(rng)?;
            if let Some(Expr::Feature(f)) = child.subtree_mut(site) {
                let others: Vec<Feature> = Feature::ALL.into_iter().filter(|g| g != f).collect();
                *f = *others.choose(rng)?;
            }
        }
        MutationOp::WrapMinMax => {
            let site = rng.random_range(0..parent.node_count());
            let func = if rng.random_bool(0.5) {
                Func::Min
            } else {
                Func::Max
            };
            let literal = fresh_literal(rng);
            let slot = child.subtree_mut(site)?;
            let inner = std::mem::replace(slot, Expr::Num(0.0));
            *slot = Expr::Call(func, vec![inner, Expr::Num(literal)]);
        }
        MutationOp::Crossover => {
            let donor = other?;
            let graft = donor
                .subtree(rng.random_range(0..donor.node_count()))?
                .clone();
            let site = rng.random_range(0..parent.node_count());
            *child.subtree_mut(site)? = graft;
        }
    }
    Some(child)
}

/// Log-uniform over [0.01, 1000], rounded to three significant digits.
fn fresh_literal(rng: &mut SearchRng) -> f64 {
    let v = 10f64.powf(rng.random_range(-2.0..3.0));
    let scale = 10f64.powi(2 - v.log10().floor() as i32);
    (v * scale).round() / scale
}
