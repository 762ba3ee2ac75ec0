//! Forward-mode automatic differentiation over [`Expr`] trees.
//!
//! [`Jet2`] carries a value, derivatives along two tagged directions and the
//! mixed second derivative. Every propagation rule is written so that
//! swapping the two directions swaps `d1`/`d2` and leaves `d12` bitwise
//! unchanged.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::expr::{BinaryOp, Expr, UnaryOp, Var};

/// Truncated bivariate Taylor jet `value + d1·t + d2·ε + d12·tε`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl Jet2 {
    pub const fn new(value: f64, d1: f64, d2: f64, d12: f64) -> Self {
        Jet2 { value, d1, d2, d12 }
    }

    pub const fn constant(value: f64) -> Self {
        Jet2::new(value, 0.0, 0.0, 0.0)
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Jet2 {
        Jet2 {
            value: f,
            d1: df * self.d1,
            d2: df * self.d2,
            d12: ddf * (self.d1 * self.d2) + df * self.d12,
        }
    }

    fn has_derivatives(&self) -> bool {
        self.d1 != 0.0 || self.d2 != 0.0 || self.d12 != 0.0
    }

    pub fn sin(self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn try_ln(self) -> Result<Jet2> {
        let u = self.value;
        if u <= 0.0 {
            return Err(Error::Domain(format!("log of non-positive argument {u}")));
        }
        let inv = 1.0 / u;
        Ok(self.chain(u.ln(), inv, -inv * inv))
    }

    pub fn try_sqrt(self) -> Result<Jet2> {
        let u = self.value;
        if u < 0.0 {
            return Err(Error::Domain(format!("sqrt of negative argument {u}")));
        }
        if u == 0.0 {
            if self.has_derivatives() {
                return Err(Error::Domain("sqrt is not differentiable at 0".into()));
            }
            return Ok(Jet2::constant(0.0));
        }
        let r = u.sqrt();
        let dr = 0.5 / r;
        Ok(self.chain(r, dr, -dr / (2.0 * u)))
    }

    pub fn try_div(self, rhs: Jet2) -> Result<Jet2> {
        let b = rhs.value;
        if b == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let q = self.value / b;
        let q1 = (self.d1 - q * rhs.d1) / b;
        let q2 = (self.d2 - q * rhs.d2) / b;
        let q12 = (self.d12 - (q1 * rhs.d2 + q2 * rhs.d1) - q * rhs.d12) / b;
        Ok(Jet2::new(q, q1, q2, q12))
    }

    pub fn try_powi(self, k: i32) -> Result<Jet2> {
        let u = self.value;
        if k == 0 {
            return Ok(Jet2::constant(1.0));
        }
        if k < 0 && u == 0.0 {
            return Err(Error::Domain(format!("zero raised to negative power {k}")));
        }
        if k == 1 {
            return Ok(self);
        }
        let kf = k as f64;
        let df = kf * u.powi(k - 1);
        let ddf = kf * (kf - 1.0) * u.powi(k - 2);
        Ok(self.chain(u.powi(k), df, ddf))
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, r: Jet2) -> Jet2 {
        Jet2::new(self.value + r.value, self.d1 + r.d1, self.d2 + r.d2, self.d12 + r.d12)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, r: Jet2) -> Jet2 {
        Jet2::new(self.value - r.value, self.d1 - r.d1, self.d2 - r.d2, self.d12 - r.d12)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, r: Jet2) -> Jet2 {
        Jet2 {
            value: self.value * r.value,
            d1: self.d1 * r.value + self.value * r.d1,
            d2: self.d2 * r.value + self.value * r.d2,
            d12: self.d12 * r.value + (self.d1 * r.d2 + self.d2 * r.d1) + self.value * r.d12,
        }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, r: f64) -> Jet2 {
        Jet2::new(self.value * r, self.d1 * r, self.d2 * r, self.d12 * r)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::new(-self.value, -self.d1, -self.d2, -self.d12)
    }
}

/// Arithmetic needed by the tree evaluator; implemented for plain `f64`
/// and for [`Jet2`].
pub(crate) trait Number: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn lift(c: f64) -> Self;
    fn try_div(self, rhs: Self) -> Result<Self>;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn try_ln(self) -> Result<Self>;
    fn try_sqrt(self) -> Result<Self>;
    fn try_powi(self, k: i32) -> Result<Self>;
}

impl Number for f64 {
    fn lift(c: f64) -> Self {
        c
    }
    fn try_div(self, rhs: f64) -> Result<f64> {
        if rhs == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self / rhs)
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn try_ln(self) -> Result<f64> {
        if self <= 0.0 {
            return Err(Error::Domain(format!("log of non-positive argument {self}")));
        }
        Ok(self.ln())
    }
    fn try_sqrt(self) -> Result<f64> {
        if self < 0.0 {
            return Err(Error::Domain(format!("sqrt of negative argument {self}")));
        }
        Ok(self.sqrt())
    }
    fn try_powi(self, k: i32) -> Result<f64> {
        if k < 0 && self == 0.0 {
            return Err(Error::Domain(format!("zero raised to negative power {k}")));
        }
        Ok(self.powi(k))
    }
}

impl Number for Jet2 {
    fn lift(c: f64) -> Self {
        Jet2::constant(c)
    }
    fn try_div(self, rhs: Jet2) -> Result<Jet2> {
        Jet2::try_div(self, rhs)
    }
    fn sin(self) -> Jet2 {
        Jet2::sin(self)
    }
    fn cos(self) -> Jet2 {
        Jet2::cos(self)
    }
    fn exp(self) -> Jet2 {
        Jet2::exp(self)
    }
    fn try_ln(self) -> Result<Jet2> {
        Jet2::try_ln(self)
    }
    fn try_sqrt(self) -> Result<Jet2> {
        Jet2::try_sqrt(self)
    }
    fn try_powi(self, k: i32) -> Result<Jet2> {
        Jet2::try_powi(self, k)
    }
}

pub(crate) fn eval_generic<N: Number>(e: &Expr, lookup: &dyn Fn(Var) -> Result<N>) -> Result<N> {
    Ok(match e {
        Expr::Const(c) => N::lift(*c),
        Expr::Pi => N::lift(std::f64::consts::PI),
        Expr::Var(v) => lookup(*v)?,
        Expr::Unary(op, a) => {
            let a = eval_generic(a, lookup)?;
            match op {
                UnaryOp::Neg => -a,
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Log => a.try_ln()?,
                UnaryOp::Sqrt => a.try_sqrt()?,
            }
        }
        Expr::Binary(op, a, b) => {
            let a = eval_generic(a, lookup)?;
            let b = eval_generic(b, lookup)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => a.try_div(b)?,
            }
        }
        Expr::Pow(a, k) => eval_generic(a, lookup)?.try_powi(*k)?,
    })
}

/// Base and fiber coordinates of a point of the total space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalPoint {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl EvalPoint {
    pub fn new(x: Vec<f64>, f: Vec<f64>) -> Self {
        EvalPoint { x, f }
    }

    pub fn coord(&self, v: Var) -> Result<f64> {
        let (slice, i) = match v {
            Var::X(i) => (&self.x, i),
            Var::F(i) => (&self.f, i),
        };
        slice.get(i).copied().ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "{v} not available at a point with m={}, n={}",
                self.x.len(),
                self.f.len()
            ))
        })
    }
}

/// A point with a [`Jet2`] attached to every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub x: Vec<Jet2>,
    pub f: Vec<Jet2>,
}

impl JetPoint {
    /// Lifts `p` with tangent directions `dir1 = (a1, b1)` and
    /// `dir2 = (a2, b2)` in (base, fiber) components.
    pub fn directional(p: &EvalPoint, dir1: (&[f64], &[f64]), dir2: (&[f64], &[f64])) -> Self {
        let lift = |vals: &[f64], d1: &[f64], d2: &[f64]| -> Vec<Jet2> {
            vals.iter()
                .enumerate()
                .map(|(i, &v)| {
                    Jet2::new(
                        v,
                        d1.get(i).copied().unwrap_or(0.0),
                        d2.get(i).copied().unwrap_or(0.0),
                        0.0,
                    )
                })
                .collect()
        };
        JetPoint {
            x: lift(&p.x, dir1.0, dir2.0),
            f: lift(&p.f, dir1.1, dir2.1),
        }
    }

    /// Seeds direction 1 on coordinate `a` and direction 2 on `b`.
    pub fn tagged(p: &EvalPoint, a: Option<Var>, b: Option<Var>) -> Self {
        let mut jp = JetPoint::directional(p, (&[], &[]), (&[], &[]));
        if let Some(a) = a {
            if let Some(slot) = jp.slot_mut(a) {
                slot.d1 = 1.0;
            }
        }
        if let Some(b) = b {
            if let Some(slot) = jp.slot_mut(b) {
                slot.d2 = 1.0;
            }
        }
        jp
    }

    fn slot_mut(&mut self, v: Var) -> Option<&mut Jet2> {
        match v {
            Var::X(i) => self.x.get_mut(i),
            Var::F(i) => self.f.get_mut(i),
        }
    }

    pub fn coord(&self, v: Var) -> Result<Jet2> {
        let (slice, i) = match v {
            Var::X(i) => (&self.x, i),
            Var::F(i) => (&self.f, i),
        };
        slice.get(i).copied().ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "{v} not available at a point with m={}, n={}",
                self.x.len(),
                self.f.len()
            ))
        })
    }
}

fn check_dir(p: &EvalPoint, v: Var) -> Result<()> {
    p.coord(v).map(|_| ())
}

/// Plain IEEE double evaluation.
pub fn eval(e: &Expr, p: &EvalPoint) -> Result<f64> {
    eval_generic(e, &|v| p.coord(v))
}

/// Evaluates with jets attached to the coordinates.
pub fn eval_jet(e: &Expr, p: &JetPoint) -> Result<Jet2> {
    eval_generic(e, &|v| p.coord(v))
}

/// First partial derivative along the coordinate `dir`.
pub fn partial(e: &Expr, p: &EvalPoint, dir: Var) -> Result<f64> {
    check_dir(p, dir)?;
    Ok(eval_jet(e, &JetPoint::tagged(p, Some(dir), None))?.d1)
}

/// Mixed second partial `∂²e/∂a∂b`; symmetric in `(a, b)` bitwise.
pub fn mixed_second(e: &Expr, p: &EvalPoint, a: Var, b: Var) -> Result<f64> {
    check_dir(p, a)?;
    check_dir(p, b)?;
    Ok(eval_jet(e, &JetPoint::tagged(p, Some(a), Some(b)))?.d12)
}

/// Value and directional derivative along the tangent `(a, b)`.
pub fn directional(e: &Expr, p: &EvalPoint, a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    let j = eval_jet(e, &JetPoint::directional(p, (a, b), (&[], &[])))?;
    Ok((j.value, j.d1))
}

/// Value with the full gradient split into base and fiber parts.
pub fn gradient(e: &Expr, p: &EvalPoint) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let value = eval(e, p)?;
    let dx = (0..p.x.len())
        .map(|i| partial(e, p, Var::X(i)))
        .collect::<Result<Vec<_>>>()?;
    let df = (0..p.f.len())
        .map(|i| partial(e, p, Var::F(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok((value, dx, df))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Dims};

    fn e(src: &str, m: usize, n: usize) -> Expr {
        parse(src, Dims::new(m, n)).unwrap()
    }

    #[test]
    fn eval_examples() {
        let p = EvalPoint::new(vec![3.0, 5.0], vec![]);
        assert_eq!(eval(&e("x1*x2", 2, 1), &p).unwrap(), 15.0);
        let p0 = EvalPoint::new(vec![0.0], vec![]);
        assert_eq!(eval(&e("sin(x1)", 1, 1), &p0).unwrap(), 0.0);
        assert!(matches!(eval(&e("log(x1)", 1, 1), &p0), Err(Error::Domain(_))));
    }

    #[test]
    fn domain_errors() {
        let p = EvalPoint::new(vec![0.0], vec![-1.0]);
        for src in ["sqrt(f1)", "1/x1", "x1^-1", "log(f1)"] {
            assert!(matches!(eval(&e(src, 1, 1), &p), Err(Error::Domain(_))), "{src}");
        }
        // sqrt(0) has a value but no derivative
        assert_eq!(eval(&e("sqrt(x1)", 1, 1), &p).unwrap(), 0.0);
        assert!(partial(&e("sqrt(x1)", 1, 1), &p, Var::X(0)).is_err());
        assert_eq!(partial(&e("sqrt(x1)", 1, 1), &p, Var::F(0)).unwrap(), 0.0);
    }

    #[test]
    fn partial_examples() {
        let p = EvalPoint::new(vec![3.0], vec![]);
        assert_eq!(partial(&e("x1^2", 1, 1), &p, Var::X(0)).unwrap(), 6.0);
        let p = EvalPoint::new(vec![2.0], vec![5.0]);
        assert_eq!(partial(&e("f1*x1", 1, 1), &p, Var::F(0)).unwrap(), 2.0);
        // d/dx exp(2x) at 0 = 2
        let p = EvalPoint::new(vec![0.0], vec![]);
        assert_eq!(partial(&e("exp(2*x1)", 1, 1), &p, Var::X(0)).unwrap(), 2.0);
    }

    #[test]
    fn mixed_second_examples() {
        let p = EvalPoint::new(vec![3.0, 5.0], vec![]);
        let xy = e("x1*x2", 2, 1);
        assert_eq!(mixed_second(&xy, &p, Var::X(0), Var::X(1)).unwrap(), 1.0);
        assert_eq!(mixed_second(&xy, &p, Var::X(0), Var::X(0)).unwrap(), 0.0);
        // d²/dx1dx2 sin(x1)*x2 = cos(x1) = 1 at x1 = 0
        let p = EvalPoint::new(vec![0.0, 2.0], vec![]);
        let s = e("sin(x1)*x2", 2, 1);
        assert_eq!(mixed_second(&s, &p, Var::X(0), Var::X(1)).unwrap(), 1.0);
        // pure second derivative of x1^3 at 2 is 12
        let p = EvalPoint::new(vec![2.0], vec![]);
        assert_eq!(mixed_second(&e("x1^3", 1, 1), &p, Var::X(0), Var::X(0)).unwrap(), 12.0);
    }

    #[test]
    fn jet_value_matches_plain_eval_bitwise() {
        let ex = e("exp(x1*f1)/(1.5 + sin(f1)^2) - sqrt(2 + x1^2)*log(3 + f1)", 1, 1);
        let p = EvalPoint::new(vec![0.37], vec![-1.1]);
        let j = eval_jet(&ex, &JetPoint::tagged(&p, Some(Var::X(0)), Some(Var::F(0)))).unwrap();
        assert_eq!(j.value, eval(&ex, &p).unwrap());
    }

    #[test]
    fn lifted_constant_has_no_derivatives() {
        let c = Jet2::constant(4.2);
        assert_eq!((c.d1, c.d2, c.d12), (0.0, 0.0, 0.0));
    }

    #[test]
    fn missing_coordinate_is_dimension_error() {
        let p = EvalPoint::new(vec![1.0], vec![]);
        assert!(matches!(eval(&e("f1", 1, 1), &p), Err(Error::DimensionMismatch(_))));
        assert!(partial(&e("x1", 1, 1), &p, Var::X(3)).is_err());
    }
}
