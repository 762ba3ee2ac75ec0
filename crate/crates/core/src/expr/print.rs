use std::fmt;

use super::{BinaryOp, Expr, UnaryOp, Var};

// Binding strength of the grammar levels: sum < term < factor < power < atom.
const SUM: u8 = 1;
const TERM: u8 = 2;
const FACTOR: u8 = 3;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => TERM,
        Expr::Unary(UnaryOp::Neg, _) => FACTOR,
        Expr::Pow(..) => 4,
        Expr::Const(c) if *c < 0.0 => 0,
        _ => ATOM,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::F(i) => write!(f, "f{}", i + 1),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                write_at(f, a, FACTOR)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let (sym, lhs_min, rhs_min) = match op {
                    BinaryOp::Add => (" + ", SUM, TERM),
                    BinaryOp::Sub => (" - ", SUM, TERM),
                    BinaryOp::Mul => ("*", TERM, FACTOR),
                    BinaryOp::Div => ("/", TERM, FACTOR),
                };
                write_at(f, a, lhs_min)?;
                f.write_str(sym)?;
                write_at(f, b, rhs_min)
            }
            Expr::Pow(base, k) => {
                write_at(f, base, ATOM)?;
                write!(f, "^{k}")
            }
        }
    }
}
