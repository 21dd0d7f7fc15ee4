//! The reference machine: a small, pure S-expression language evaluated
//! under an explicit step budget.

mod ast;
mod eval;
mod int;
mod sexpr;

pub use ast::{Body, Definition, Expr, Prim, Program, Root};
pub use eval::{
    evaluate, evaluate_int, force_bits, run_sequence, step_count, Evaluation, Fuel, SequenceRun,
    Value, MAX_DEPTH,
};
pub use int::Integer;
pub use sexpr::Datum;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {position}: {message}")]
pub struct SyntaxError {
    pub position: usize,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(position: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unbound variable '{0}'")]
    UnboundVariable(String),
    #[error("malformed program: {0}")]
    Malformed(String),
}

/// Candidate failures. None of these abort a search.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("fuel exhausted after {consumed} steps")]
    FuelExhausted { consumed: u64 },
    #[error("type error: {0}")]
    Type(String),
    #[error("program takes {expected} argument(s), given {got}")]
    Arity { expected: usize, got: usize },
    #[error("evaluation nested deeper than {MAX_DEPTH} frames")]
    RecursionLimit,
}
