//! Scalar expression language for Christoffel symbols, sections and gauge
//! potentials.
//!
//! Expressions are functions of base coordinates `x1..xm` and fiber
//! coordinates `f1..fn` (`v1..vn` is accepted as an alias for the fiber
//! coordinates of a vector bundle). The grammar is
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" integer)?
//! atom   := number | "pi" | ident | func "(" expr ")" | "(" expr ")"
//! func   := "sin" | "cos" | "exp" | "log" | "sqrt"
//! ident  := ("x" | "f" | "v") positive-integer
//! ```
//!
//! Printing with [`std::fmt::Display`] and reparsing yields a structurally
//! identical tree.

mod parse;
mod print;
pub(crate) mod symbolic;

use std::collections::BTreeSet;
use std::ops;

use crate::error::{Error, Result};

pub use parse::parse;

/// Base and fiber dimensions an expression is bound against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
}

impl Dims {
    pub fn new(m: usize, n: usize) -> Self {
        Dims { m, n }
    }
}

/// A coordinate of the total space, zero-based.
///
/// `Var::X(0)` prints as `x1`, `Var::F(2)` as `f3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(usize),
    F(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree.
///
/// `Const` holds a finite, non-negative literal; negative values are
/// represented as `Neg(Const(..))`, which is what the parser produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Pi,
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    /// A literal; negative values become `Neg(Const(|value|))`.
    pub fn constant(value: f64) -> Expr {
        if value < 0.0 {
            Expr::Unary(UnaryOp::Neg, Box::new(Expr::Const(-value)))
        } else {
            Expr::Const(value)
        }
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn x(index: usize) -> Expr {
        Expr::Var(Var::X(index))
    }

    pub fn f(index: usize) -> Expr {
        Expr::Var(Var::F(index))
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn powi(self, exponent: i32) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    /// Literal value if the expression is a bare constant (including a
    /// negated one).
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Unary(UnaryOp::Neg, inner) => match inner.as_ref() {
                Expr::Const(c) => Some(-*c),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    /// Sum that drops literal zeros; an empty sum is `0`.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms
            .into_iter()
            .filter(|t| !t.is_zero())
            .reduce(|acc, t| Expr::binary(BinaryOp::Add, acc, t))
            .unwrap_or_else(Expr::zero)
    }

    /// Product with the obvious literal shortcuts (`0*e = 0`, `1*e = e`).
    pub fn product(lhs: Expr, rhs: Expr) -> Expr {
        match (lhs.as_constant(), rhs.as_constant()) {
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 0.0 => Expr::zero(),
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) if a == 1.0 => rhs,
            (_, Some(b)) if b == 1.0 => lhs,
            _ => Expr::binary(BinaryOp::Mul, lhs, rhs),
        }
    }

    /// Negation that folds literals.
    pub fn negated(self) -> Expr {
        match self.as_constant() {
            Some(c) if c == 0.0 => Expr::zero(),
            Some(c) => Expr::constant(-c),
            None => Expr::unary(UnaryOp::Neg, self),
        }
    }

    /// Every variable referenced by the expression.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) | Expr::Pi => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn uses_fiber(&self) -> bool {
        self.variables().iter().any(|v| matches!(v, Var::F(_)))
    }

    /// Checks every variable index against `dims`.
    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        for v in self.variables() {
            let (name, index, max) = match v {
                Var::X(i) => ("x", i, dims.m),
                Var::F(i) => ("f", i, dims.n),
            };
            if index >= max {
                return Err(Error::IndexOutOfRange {
                    name: format!("{name}{}", index + 1),
                    offset: 0,
                    max,
                });
            }
        }
        Ok(())
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Pi | Expr::Var(_) => 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::constant(value)
    }
}

impl From<Var> for Expr {
    fn from(value: Var) -> Self {
        Expr::Var(value)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, self, rhs)
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, self, rhs)
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, self, rhs)
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, self, rhs)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}
