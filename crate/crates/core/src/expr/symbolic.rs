//! Structural differentiation and substitution. Used to build the prolonged
//! connection on the vertical bundle, which must itself be an expression
//! field; not part of the public surface.

use super::{BinaryOp, Expr, UnaryOp, Var};

fn diff_sub(da: Expr, db: Expr) -> Expr {
    match (da.is_zero(), db.is_zero()) {
        (_, true) => da,
        (true, false) => db.negated(),
        _ => da - db,
    }
}

impl Expr {
    /// Partial derivative with respect to `var`, as a new tree.
    pub(crate) fn derivative(&self, var: Var) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi => Expr::zero(),
            Expr::Var(v) => {
                if *v == var {
                    Expr::Const(1.0)
                } else {
                    Expr::zero()
                }
            }
            Expr::Unary(op, a) => {
                let da = a.derivative(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let a = a.as_ref().clone();
                match op {
                    UnaryOp::Neg => da.negated(),
                    UnaryOp::Sin => Expr::product(Expr::unary(UnaryOp::Cos, a), da),
                    UnaryOp::Cos => Expr::product(Expr::unary(UnaryOp::Sin, a).negated(), da),
                    UnaryOp::Exp => Expr::product(Expr::unary(UnaryOp::Exp, a), da),
                    UnaryOp::Log => da / a,
                    UnaryOp::Sqrt => da / (Expr::Const(2.0) * Expr::unary(UnaryOp::Sqrt, a)),
                }
            }
            Expr::Binary(op, a, b) => {
                let da = a.derivative(var);
                let db = b.derivative(var);
                match op {
                    BinaryOp::Add => Expr::sum([da, db]),
                    BinaryOp::Sub => diff_sub(da, db),
                    BinaryOp::Mul => Expr::sum([
                        Expr::product(da, b.as_ref().clone()),
                        Expr::product(a.as_ref().clone(), db),
                    ]),
                    BinaryOp::Div => {
                        let b = b.as_ref().clone();
                        if db.is_zero() {
                            if da.is_zero() {
                                Expr::zero()
                            } else {
                                da / b
                            }
                        } else {
                            let num = diff_sub(
                                Expr::product(da, b.clone()),
                                Expr::product(a.as_ref().clone(), db),
                            );
                            num / b.powi(2)
                        }
                    }
                }
            }
            Expr::Pow(a, k) => {
                let da = a.derivative(var);
                if *k == 0 || da.is_zero() {
                    return Expr::zero();
                }
                let a = a.as_ref().clone();
                let lowered = match k - 1 {
                    0 => Expr::Const(1.0),
                    1 => a,
                    j => a.powi(j),
                };
                Expr::product(Expr::product(Expr::constant(*k as f64), lowered), da)
            }
        }
    }

    /// Replaces variables for which `map` returns a tree.
    pub(crate) fn substitute(&self, map: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi => self.clone(),
            Expr::Var(v) => map(*v).unwrap_or_else(|| self.clone()),
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute(map)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(map), b.substitute(map)),
            Expr::Pow(a, k) => Expr::Pow(Box::new(a.substitute(map)), *k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Dims};
    use super::*;
    use crate::numcore::{eval, partial, EvalPoint};

    #[test]
    fn derivative_matches_autodiff() {
        let dims = Dims::new(2, 2);
        let sources = [
            "x1*sin(f1) + 2",
            "exp(x1*f2)/(1 + f1^2)",
            "log(2 + cos(f1)) - sqrt(3 + x2^2)*f2",
            "(x1 - f1)^3*f2^-2",
            "-(f1*f2)/x1",
        ];
        let p = EvalPoint::new(vec![0.7, -0.3], vec![0.4, 1.3]);
        for src in sources {
            let e = parse(src, dims).unwrap();
            for var in [Var::X(0), Var::X(1), Var::F(0), Var::F(1)] {
                let sym = eval(&e.derivative(var), &p).unwrap();
                let ad = partial(&e, &p, var).unwrap();
                assert!((sym - ad).abs() < 1e-12, "{src} d/d{var}: {sym} vs {ad}");
            }
        }
    }

    #[test]
    fn derivative_keeps_linear_fields_small() {
        let e = parse("x1*f1", Dims::new(1, 1)).unwrap();
        assert_eq!(e.derivative(Var::F(0)).to_string(), "x1");
        assert!(e.derivative(Var::X(1)).is_zero());
    }

    #[test]
    fn substitution_replaces_fiber_variables() {
        let e = parse("x1*f1 + f1^2", Dims::new(1, 1)).unwrap();
        let s = e.substitute(&|v| match v {
            Var::F(0) => Some(Expr::Const(3.0)),
            _ => None,
        });
        let p = EvalPoint::new(vec![2.0], vec![]);
        assert_eq!(eval(&s, &p).unwrap(), 15.0);
    }
}
