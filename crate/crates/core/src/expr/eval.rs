use std::collections::BTreeMap;
use std::sync::Arc;

use super::ast::{BinaryOp, ExprAst, Node, UnaryFn};
use super::jet::Jet2;
use super::ExprError;

/// Arithmetic needed by the evaluator. Implemented for `f64` and [`Jet2`];
/// both go through the same sequence of floating-point operations, so the
/// value part of a jet is bit-identical to the plain real evaluation.
trait Number: Sized + Clone {
    fn constant(c: f64, dim: usize) -> Self;
    fn coordinate(index: usize, value: f64, dim: usize) -> Self;
    fn val(&self) -> f64;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn over(&self, rhs: &Self) -> Self;
    fn negate(&self) -> Self;
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
}

impl Number for f64 {
    fn constant(c: f64, _: usize) -> Self {
        c
    }
    fn coordinate(_: usize, value: f64, _: usize) -> Self {
        value
    }
    fn val(&self) -> f64 {
        *self
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn negate(&self) -> Self {
        -self
    }
    fn chain(&self, f0: f64, _: f64, _: f64) -> Self {
        f0
    }
}

impl Number for Jet2 {
    fn constant(c: f64, dim: usize) -> Self {
        Jet2::constant(c, dim)
    }
    fn coordinate(index: usize, value: f64, dim: usize) -> Self {
        Jet2::variable(index, value, dim)
    }
    fn val(&self) -> f64 {
        self.value()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        self.div(rhs)
    }
    fn negate(&self) -> Self {
        -self
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        Jet2::chain(self, f0, f1, f2)
    }
}

/// Largest integer exponent evaluated by repeated multiplication.
const MAX_INT_EXPONENT: f64 = 1024.0;

struct Evaluator<'a> {
    point: &'a [f64],
    params: &'a [f64],
}

impl Evaluator<'_> {
    fn domain(&self, op: &'static str, argument: f64) -> ExprError {
        ExprError::Domain { op, argument, point: self.point.to_vec() }
    }

    fn eval<N: Number>(&self, node: &Node) -> Result<N, ExprError> {
        let dim = self.point.len();
        Ok(match node {
            Node::Const(c) => N::constant(*c, dim),
            Node::Named(k) => N::constant(k.value(), dim),
            Node::Param(i) => N::constant(self.params[*i], dim),
            Node::Coord(i) => N::coordinate(*i, self.point[*i], dim),
            Node::Unary(func, arg) => {
                let a: N = self.eval(arg)?;
                self.unary(*func, &a)?
            }
            Node::Binary(BinaryOp::Pow, base, exponent) => self.power(base, exponent)?,
            Node::Binary(op, lhs, rhs) => {
                let a: N = self.eval(lhs)?;
                let b: N = self.eval(rhs)?;
                match op {
                    BinaryOp::Add => a.plus(&b),
                    BinaryOp::Sub => a.minus(&b),
                    BinaryOp::Mul => a.times(&b),
                    BinaryOp::Div => {
                        if b.val() == 0.0 {
                            return Err(self.domain("/", b.val()));
                        }
                        a.over(&b)
                    }
                    BinaryOp::Pow => unreachable!(),
                }
            }
        })
    }

    fn unary<N: Number>(&self, func: UnaryFn, a: &N) -> Result<N, ExprError> {
        let x = a.val();
        Ok(match func {
            UnaryFn::Neg => a.negate(),
            UnaryFn::Sin => a.chain(x.sin(), x.cos(), -x.sin()),
            UnaryFn::Cos => a.chain(x.cos(), -x.sin(), -x.cos()),
            UnaryFn::Tan => {
                let t = x.tan();
                let d = 1.0 + t * t;
                a.chain(t, d, 2.0 * t * d)
            }
            UnaryFn::Exp => {
                let e = x.exp();
                a.chain(e, e, e)
            }
            UnaryFn::Log => {
                if x <= 0.0 {
                    return Err(self.domain("log", x));
                }
                a.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
            }
            UnaryFn::Sqrt => {
                if x <= 0.0 {
                    return Err(self.domain("sqrt", x));
                }
                let s = x.sqrt();
                a.chain(s, 0.5 / s, -0.25 / (s * x))
            }
            UnaryFn::Abs => {
                let sign = if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                a.chain(x.abs(), sign, 0.0)
            }
        })
    }

    fn power<N: Number>(&self, base: &Node, exponent: &Node) -> Result<N, ExprError> {
        let a: N = self.eval(base)?;
        if exponent.is_coordinate_free() {
            let n: f64 = self.eval(exponent)?;
            if n.fract() == 0.0 && n.abs() <= MAX_INT_EXPONENT {
                return self.integer_power(&a, n as i64);
            }
        }
        let b: N = self.eval(exponent)?;
        let x = a.val();
        if x <= 0.0 {
            return Err(self.domain("^", x));
        }
        let ln_a = a.chain(x.ln(), 1.0 / x, -1.0 / (x * x));
        let t = ln_a.times(&b);
        let e = t.val().exp();
        Ok(t.chain(e, e, e))
    }

    fn integer_power<N: Number>(&self, a: &N, n: i64) -> Result<N, ExprError> {
        let dim = self.point.len();
        if n < 0 && a.val() == 0.0 {
            return Err(self.domain("^", 0.0));
        }
        let mut k = n.unsigned_abs();
        let mut acc: Option<N> = None;
        let mut sq = a.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(prev) => prev.times(&sq),
                });
            }
            k >>= 1;
            if k > 0 {
                sq = sq.times(&sq);
            }
        }
        let pos = acc.unwrap_or_else(|| N::constant(1.0, dim));
        if n < 0 {
            Ok(N::constant(1.0, dim).over(&pos))
        } else {
            Ok(pos)
        }
    }
}

/// A parsed expression with its parameters bound to values. Cheap to clone;
/// evaluation is a pure function of `(ast, bindings, point)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    ast: Arc<ExprAst>,
    params: Arc<[f64]>,
}

impl ScalarField {
    pub fn new(ast: ExprAst, bindings: &BTreeMap<String, f64>) -> Result<Self, ExprError> {
        let params = ast
            .params()
            .iter()
            .map(|name| {
                bindings
                    .get(name)
                    .copied()
                    .ok_or_else(|| ExprError::UnboundParameter(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScalarField { ast: Arc::new(ast), params: params.into() })
    }

    /// Parse and bind in one step.
    pub fn parse(
        text: &str,
        coords: &[String],
        bindings: &BTreeMap<String, f64>,
    ) -> Result<Self, ExprError> {
        let params: Vec<String> = bindings.keys().cloned().collect();
        let ast = super::parse(text, coords, &params)?;
        ScalarField::new(ast, bindings)
    }

    /// Constant field on an `dim`-dimensional chart.
    pub fn constant(value: f64, coords: &[String]) -> Self {
        let ast = ExprAst {
            root: Node::Const(value),
            coords: Arc::from(coords.to_vec()),
            params: Arc::from(Vec::<String>::new()),
        };
        ScalarField { ast: Arc::new(ast), params: Arc::from(Vec::<f64>::new()) }
    }

    pub fn ast(&self) -> &ExprAst {
        &self.ast
    }

    pub fn dim(&self) -> usize {
        self.ast.dim()
    }

    /// True when the field does not depend on the coordinates.
    pub fn is_constant(&self) -> bool {
        self.ast.root().is_coordinate_free()
    }

    fn check_dim(&self, p: &[f64]) -> Result<(), ExprError> {
        if p.len() != self.dim() {
            return Err(ExprError::DimensionMismatch { expected: self.dim(), found: p.len() });
        }
        Ok(())
    }

    pub fn eval_real(&self, p: &[f64]) -> Result<f64, ExprError> {
        self.check_dim(p)?;
        Evaluator { point: p, params: &self.params }.eval(self.ast.root())
    }

    pub fn eval_jet2(&self, p: &[f64]) -> Result<Jet2, ExprError> {
        self.check_dim(p)?;
        Evaluator { point: p, params: &self.params }.eval(self.ast.root())
    }
}
