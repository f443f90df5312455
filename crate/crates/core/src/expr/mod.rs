//! Arithmetic expression language used by config files.
//!
//! Grammar, loosest to tightest: `+ -`, `* /`, unary `-`, `^` (right
//! associative). `-x^2` is `-(x^2)`; the exponent operand may itself carry a
//! unary minus, so `2^-1` is accepted. Functions `sin cos tan exp sqrt` take a
//! single parenthesized argument; `pi` is a constant. There is no implicit
//! multiplication.

mod ast;
mod eval;
mod lexer;
mod parser;

pub use ast::{Ast, AstKind, BinaryOp, Func, Span};
pub use eval::{grad, ExprField, Field};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

pub use crate::numkernel::EvalError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<&'static str>, found: String },
    #[error("invalid numeric literal `{text}` at offset {offset}")]
    BadNumber { offset: usize, text: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}
