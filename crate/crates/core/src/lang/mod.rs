//! The evolvable function space: arithmetic priority expressions over unit
//! features, evaluated under a node budget and decoded into schedules.

pub mod ast;
pub mod decode;
pub mod interp;
pub mod parser;

use std::fmt;

pub use ast::{BinOp, CmpOp, Expr, Feature, Func, MAX_NODES};
pub use decode::{decode, decode_with, DecodeError, DecodeLimits};
pub use interp::{Budget, EvalError, FeatureContext, DEFAULT_NODE_BUDGET};
pub use parser::ParseError;

/// Program that every search starts from: cheapest unit first.
pub const SEED_PROGRAM: &str = "-cost_rate";

/// A parsed priority rule together with the text it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicProgram {
    source: String,
    ast: Expr,
}

impl HeuristicProgram {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        Ok(HeuristicProgram {
            ast: parser::parse_expr(source)?,
            source: source.to_string(),
        })
    }

    /// Wraps an already-built tree; the source becomes its canonical text.
    pub fn from_ast(ast: Expr) -> Result<Self, ParseError> {
        let nodes = ast.node_count();
        if nodes > MAX_NODES {
            return Err(ParseError::TooLarge {
                nodes,
                limit: MAX_NODES,
            });
        }
        Ok(HeuristicProgram {
            source: ast.to_string(),
            ast,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn node_count(&self) -> usize {
        self.ast.node_count()
    }

    /// Canonical text; programs that parse to the same tree share it.
    pub fn normalized(&self) -> String {
        self.ast.to_string()
    }

    pub fn evaluate_priority(
        &self,
        ctx: &FeatureContext,
        budget: &mut Budget,
    ) -> Result<f64, EvalError> {
        interp::eval(&self.ast, ctx, budget)
    }
}

impl fmt::Display for HeuristicProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
