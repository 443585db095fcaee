use thiserror::Error;

use super::ast::{BinOp, CmpOp, Expr, Feature, Func};

/// Node evaluations allowed per decode.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("numeric domain error: {0}")]
    NumericDomain(String),
    #[error("node-evaluation budget exhausted")]
    BudgetExhausted,
}

/// Snapshot of one unit at one period, as seen by a priority program.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FeatureContext {
    pub cost_rate: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub min_up: f64,
    pub min_down: f64,
    pub demand: f64,
    pub residual_demand: f64,
    pub hours_in_state: f64,
    pub is_on: f64,
    pub t: f64,
    pub horizon: f64,
    pub units: f64,
}

impl FeatureContext {
    #[inline]
    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::CostRate => self.cost_rate,
            Feature::PMin => self.p_min,
            Feature::PMax => self.p_max,
            Feature::MinUp => self.min_up,
            Feature::MinDown => self.min_down,
            Feature::Demand => self.demand,
            Feature::ResidualDemand => self.residual_demand,
            Feature::HoursInState => self.hours_in_state,
            Feature::IsOn => self.is_on,
            Feature::Period => self.t,
            Feature::Horizon => self.horizon,
            Feature::Units => self.units,
        }
    }
}

/// Remaining node evaluations, shared across calls within one decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Budget {
    #[inline]
    fn charge(&mut self) -> Result<(), EvalError> {
        if self.0 == 0 {
            return Err(EvalError::BudgetExhausted);
        }
        self.0 -= 1;
        Ok(())
    }
}

fn finite(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NumericDomain(format!("{what} produced {v}")))
    }
}

fn truth(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Evaluates `expr` under `ctx`, charging one unit of `budget` per node visited.
/// `if` evaluates only the selected branch.
pub fn eval(expr: &Expr, ctx: &FeatureContext, budget: &mut Budget) -> Result<f64, EvalError> {
    budget.charge()?;
    match expr {
        Expr::Num(v) => Ok(*v),
        Expr::Feature(f) => finite(ctx.get(*f), f.name()),
        Expr::Neg(e) => Ok(-eval(e, ctx, budget)?),
        Expr::Binary(op, l, r) => {
            let a = eval(l, ctx, budget)?;
            let b = eval(r, ctx, budget)?;
            let v = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::NumericDomain("division by zero".into()));
                    }
                    a / b
                }
            };
            finite(v, op.symbol())
        }
        Expr::Compare(op, l, r) => {
            let a = eval(l, ctx, budget)?;
            let b = eval(r, ctx, budget)?;
            Ok(truth(match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq => a == b,
            }))
        }
        Expr::Call(func, args) => match func {
            Func::Min => Ok(eval(&args[0], ctx, budget)?.min(eval(&args[1], ctx, budget)?)),
            Func::Max => Ok(eval(&args[0], ctx, budget)?.max(eval(&args[1], ctx, budget)?)),
            Func::Abs => Ok(eval(&args[0], ctx, budget)?.abs()),
            Func::If => {
                if eval(&args[0], ctx, budget)? != 0.0 {
                    eval(&args[1], ctx, budget)
                } else {
                    eval(&args[2], ctx, budget)
                }
            }
        },
    }
}
