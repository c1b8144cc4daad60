//! Coordinate expressions: parsing, real evaluation and second-order
//! forward-mode differentiation.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term , { ( "+" | "-" ) , term } ;
//! term    = unary , { ( "*" | "/" ) , unary } ;
//! unary   = "-" , unary | power ;
//! power   = primary , [ "^" , unary ] ;
//! primary = number | name | func , "(" , expr , ")" | "(" , expr , ")" ;
//! func    = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "abs" ;
//! number  = digits , [ "." , digits ] , [ ( "e" | "E" ) , [ "+" | "-" ] , digits ] ;
//! ```
//!
//! A `name` resolves, in order, to a declared coordinate, a declared
//! parameter, or one of the constants `pi` and `e`. There is no implicit
//! multiplication: `2x1` is rejected.
//!
//! Exponents that do not depend on the coordinates and have an integral
//! value are evaluated by repeated multiplication; any other exponent needs a
//! strictly positive base.

mod ast;
mod eval;
mod jet;
mod parser;

pub use ast::{BinaryOp, ExprAst, NamedConst, Node, UnaryFn};
pub use eval::ScalarField;
pub use jet::Jet2;
pub use parser::parse;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {position}: found {found}, expected one of: {}", expected.join(", "))]
    Syntax { position: usize, found: String, expected: Vec<String> },
    #[error("unknown identifier `{name}` at offset {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("parameter `{0}` has no value")]
    UnboundParameter(String),
    #[error("`{op}` is undefined for argument {argument} at point {point:?}")]
    Domain { op: &'static str, argument: f64, point: Vec<f64> },
    #[error("point has {found} coordinates, expression expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}
