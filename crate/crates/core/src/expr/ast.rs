use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedConst {
    Pi,
    E,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::E => std::f64::consts::E,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedConst::Pi => "pi",
            NamedConst::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryFn {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl UnaryFn {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "tan" => UnaryFn::Tan,
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sqrt" => UnaryFn::Sqrt,
            "abs" => UnaryFn::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Neg => "neg",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

/// Expression tree node. Coordinates and parameters are stored by index into
/// the owning [`ExprAst`]'s name tables.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Named(NamedConst),
    Coord(usize),
    Param(usize),
    Unary(UnaryFn, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

impl Node {
    /// True when the subtree references no coordinate, so its value is fixed
    /// once parameters are bound.
    pub fn is_coordinate_free(&self) -> bool {
        match self {
            Node::Const(_) | Node::Named(_) | Node::Param(_) => true,
            Node::Coord(_) => false,
            Node::Unary(_, a) => a.is_coordinate_free(),
            Node::Binary(_, a, b) => a.is_coordinate_free() && b.is_coordinate_free(),
        }
    }

    fn count(&self, pred: &dyn Fn(&Node) -> bool) -> usize {
        let own = usize::from(pred(self));
        own + match self {
            Node::Unary(_, a) => a.count(pred),
            Node::Binary(_, a, b) => a.count(pred) + b.count(pred),
            _ => 0,
        }
    }
}

/// A parsed coordinate expression together with the coordinate and
/// parameter names it was parsed against. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub(crate) root: Node,
    pub(crate) coords: Arc<[String]>,
    pub(crate) params: Arc<[String]>,
}

impl ExprAst {
    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of coordinate-variable nodes in the tree.
    pub fn coord_refs(&self) -> usize {
        self.root.count(&|n| matches!(n, Node::Coord(_)))
    }

    /// Number of parameter nodes in the tree.
    pub fn param_refs(&self) -> usize {
        self.root.count(&|n| matches!(n, Node::Param(_)))
    }

    fn shadowed(&self, name: &str) -> bool {
        self.coords.iter().chain(self.params.iter()).any(|n| n == name)
    }

    fn write_node(&self, node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match node {
            Node::Const(c) => write!(f, "{c}"),
            Node::Named(k) => {
                if self.shadowed(k.name()) {
                    write!(f, "{}", k.value())
                } else {
                    f.write_str(k.name())
                }
            }
            Node::Coord(i) => f.write_str(&self.coords[*i]),
            Node::Param(i) => f.write_str(&self.params[*i]),
            Node::Unary(UnaryFn::Neg, a) => {
                f.write_str("(-")?;
                self.write_node(a, f)?;
                f.write_str(")")
            }
            Node::Unary(func, a) => {
                write!(f, "{}(", func.name())?;
                self.write_node(a, f)?;
                f.write_str(")")
            }
            Node::Binary(op, a, b) => {
                f.write_str("(")?;
                self.write_node(a, f)?;
                write!(f, " {} ", op.symbol())?;
                self.write_node(b, f)?;
                f.write_str(")")
            }
        }
    }
}

/// Fully parenthesised rendering that parses back to an equivalent tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_node(&self.root, f)
    }
}
