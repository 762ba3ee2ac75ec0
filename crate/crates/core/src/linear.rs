//! Linear connections on vector bundles, where `Γ^α_μ(x, v) = Σ_ω
//! Γ^α_{μω}(x) v^ω`, and a sampling test for whether a non-linear
//! connection is of this form.

use crate::bundle::{max_abs, max_abs_diff, BundlePatch, ChristoffelField, Section};
use crate::error::{Error, Result};
use crate::expr::{parse, Dims, Expr, Var};
use crate::numcore::{eval, partial, EvalPoint};

/// Scalings tried by [`linearity_detect`] after the `λ = 0` test.
pub const DEFAULT_LAMBDAS: [f64; 5] = [-2.0, -1.0, 0.5, 2.0, 7.0];

#[derive(Debug, Clone, PartialEq)]
pub struct LinearChristoffel {
    pub patch: BundlePatch,
    /// `gamma3[α][μ][ω] = Γ^α_{μω}(x)`.
    pub gamma3: Vec<Vec<Vec<Expr>>>,
}

impl LinearChristoffel {
    pub fn new(patch: BundlePatch, gamma3: Vec<Vec<Vec<Expr>>>) -> Result<Self> {
        let (m, n) = (patch.m, patch.n);
        let shape_ok = gamma3.len() == n
            && gamma3
                .iter()
                .all(|a| a.len() == m && a.iter().all(|mu| mu.len() == n));
        if !shape_ok {
            return Err(Error::DimensionMismatch(format!(
                "linear Christoffel symbols must be {n}×{m}×{n}"
            )));
        }
        for e in gamma3.iter().flatten().flatten() {
            e.check_dims(Dims::new(m, 0))?;
        }
        Ok(LinearChristoffel { patch, gamma3 })
    }

    pub fn parse<S: AsRef<str>>(patch: BundlePatch, rows: &[Vec<Vec<S>>]) -> Result<Self> {
        let dims = Dims::new(patch.m, 0);
        let gamma3 = rows
            .iter()
            .map(|a| {
                a.iter()
                    .map(|mu| mu.iter().map(|s| parse(s.as_ref(), dims)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        LinearChristoffel::new(patch, gamma3)
    }

    pub fn zero(patch: BundlePatch) -> Self {
        let gamma3 = vec![vec![vec![Expr::zero(); patch.n]; patch.m]; patch.n];
        LinearChristoffel { patch, gamma3 }
    }

    fn base(&self, x: &[f64]) -> Result<EvalPoint> {
        if x.len() != self.patch.m {
            return Err(Error::DimensionMismatch(format!(
                "base point has {} coordinates, expected {}",
                x.len(),
                self.patch.m
            )));
        }
        Ok(EvalPoint::new(x.to_vec(), vec![]))
    }
}

/// `Γ^α_μ(x, v) = Σ_ω Γ^α_{μω}(x) v^ω`.
pub fn expand_linear(l: &LinearChristoffel) -> ChristoffelField {
    let gamma = l
        .gamma3
        .iter()
        .map(|a| {
            a.iter()
                .map(|mu| Expr::sum(mu.iter().enumerate().map(|(w, e)| Expr::product(e.clone(), Expr::f(w)))))
                .collect()
        })
        .collect();
    ChristoffelField {
        patch: l.patch.clone(),
        gamma,
    }
}

/// `R^α_{μν;ω}` stored `[((α·m + μ)·m + ν)·n + ω]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalCurvature {
    pub n: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl ClassicalCurvature {
    pub fn get(&self, alpha: usize, mu: usize, nu: usize, omega: usize) -> f64 {
        self.data[((alpha * self.m + mu) * self.m + nu) * self.n + omega]
    }

    /// `Σ_ω R^α_{μν;ω} v^ω`, laid out like
    /// [`crate::bundle::CurvatureCoefficients::data`].
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.m * self.m];
        for a in 0..self.n {
            for mu in 0..self.m {
                for nu in 0..self.m {
                    out[(a * self.m + mu) * self.m + nu] =
                        (0..self.n).map(|w| self.get(a, mu, nu, w) * v[w]).sum();
                }
            }
        }
        out
    }
}

/// `∂_μΓ^α_{νω} − ∂_νΓ^α_{μω} + Σ_β (Γ^α_{μβ}Γ^β_{νω} − Γ^α_{νβ}Γ^β_{μω})`.
pub fn classical_curvature(l: &LinearChristoffel, x: &[f64]) -> Result<ClassicalCurvature> {
    let p = l.base(x)?;
    let (m, n) = (l.patch.m, l.patch.n);
    let g = |a: usize, mu: usize, w: usize| eval(&l.gamma3[a][mu][w], &p);
    let dg = |a: usize, mu: usize, w: usize, dir: usize| partial(&l.gamma3[a][mu][w], &p, Var::X(dir));
    let mut data = vec![0.0; n * m * m * n];
    for a in 0..n {
        for mu in 0..m {
            for nu in 0..m {
                if mu == nu {
                    continue;
                }
                for w in 0..n {
                    let mut r = dg(a, nu, w, mu)? - dg(a, mu, w, nu)?;
                    for b in 0..n {
                        r += g(a, mu, b)? * g(b, nu, w)? - g(a, nu, b)? * g(b, mu, w)?;
                    }
                    data[((a * m + mu) * m + nu) * n + w] = r;
                }
            }
        }
    }
    Ok(ClassicalCurvature { n, m, data })
}

/// `(∇_μ s)^α = ∂s^α/∂x^μ + Σ_ω Γ^α_{μω}(x) s^ω(x)`.
pub fn reduced_covariant(l: &LinearChristoffel, s: &Section, mu: usize, x: &[f64]) -> Result<Vec<f64>> {
    if s.patch.dims() != l.patch.dims() {
        return Err(Error::DimensionMismatch("section and connection patches differ".into()));
    }
    if mu >= l.patch.m {
        return Err(Error::DimensionMismatch(format!("base index {} out of range", mu + 1)));
    }
    let p = l.base(x)?;
    let v = s.point(x)?.f;
    (0..l.patch.n)
        .map(|a| {
            let mut r = partial(&s.comps[a], &p, Var::X(mu))?;
            for (w, vw) in v.iter().enumerate() {
                r += eval(&l.gamma3[a][mu][w], &p)? * vw;
            }
            Ok(r)
        })
        .collect()
}

/// A sample at which a field fails to be linear in the fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// The scaling tried, or `None` when the extracted coefficients fail
    /// to reproduce the field.
    pub lambda: Option<f64>,
    pub alpha: usize,
    pub mu: usize,
    /// `λ·Γ(x, v)` (or `Γ(x, v)` for the extraction test).
    pub expected: f64,
    /// `Γ(x, λv)` (or the expansion of the extracted coefficients).
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Linearity {
    Linear(LinearChristoffel),
    NotLinear(Violation),
}

fn within(expected: f64, actual: f64, tol: f64) -> bool {
    (expected - actual).abs() <= tol * expected.abs().max(1.0)
}

/// Samples `Γ(x, λv) = λΓ(x, v)`, first with `λ = 0`, then with each of
/// `lambdas`; if every sample passes, extracts `Γ^α_{μω} = ∂Γ^α_μ/∂v^ω` at
/// `v = 0` and checks that its expansion reproduces `g` at the samples.
pub fn linearity_detect(g: &ChristoffelField, samples: &[EvalPoint], lambdas: &[f64], tol: f64) -> Result<Linearity> {
    let (m, n) = (g.m(), g.n());
    let scaled = |p: &EvalPoint, lambda: f64| EvalPoint::new(p.x.clone(), p.f.iter().map(|v| v * lambda).collect());
    for p in samples {
        let base = g.eval_at(p)?;
        for lambda in std::iter::once(0.0).chain(lambdas.iter().copied()) {
            let at = g.eval_at(&scaled(p, lambda))?;
            for a in 0..n {
                for mu in 0..m {
                    let expected = lambda * base[a][mu];
                    if !within(expected, at[a][mu], tol) {
                        return Ok(Linearity::NotLinear(Violation {
                            x: p.x.clone(),
                            v: p.f.clone(),
                            lambda: Some(lambda),
                            alpha: a,
                            mu,
                            expected,
                            actual: at[a][mu],
                        }));
                    }
                }
            }
        }
    }

    let at_zero = |v: Var| match v {
        Var::F(_) => Some(Expr::zero()),
        Var::X(_) => None,
    };
    let gamma3 = g
        .gamma
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| (0..n).map(|w| e.derivative(Var::F(w)).substitute(&at_zero)).collect())
                .collect()
        })
        .collect();
    let l = LinearChristoffel::new(g.patch.clone(), gamma3)?;
    let expanded = expand_linear(&l);
    for p in samples {
        let want = g.eval_at(p)?;
        let got = expanded.eval_at(p)?;
        for a in 0..n {
            for mu in 0..m {
                if !within(want[a][mu], got[a][mu], tol) {
                    return Ok(Linearity::NotLinear(Violation {
                        x: p.x.clone(),
                        v: p.f.clone(),
                        lambda: None,
                        alpha: a,
                        mu,
                        expected: want[a][mu],
                        actual: got[a][mu],
                    }));
                }
            }
        }
    }
    Ok(Linearity::Linear(l))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// `R^α_{μν}(x, v)` of the expanded connection.
    pub general: Vec<f64>,
    /// `Σ_ω R^α_{μν;ω}(x) v^ω`.
    pub contracted: Vec<f64>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares the general curvature coefficients of `expand_linear(l)` at
/// `(x, v)` with the contraction of the classical curvature.
pub fn linear_curvature_consistency(l: &LinearChristoffel, x: &[f64], v: &[f64], tol: f64) -> Result<ConsistencyReport> {
    if v.len() != l.patch.n {
        return Err(Error::DimensionMismatch("fiber vector has the wrong length".into()));
    }
    let general = expand_linear(l)
        .curvature_coefficients(&EvalPoint::new(x.to_vec(), v.to_vec()))?
        .data;
    let contracted = classical_curvature(l, x)?.contract(v);
    let max_deviation = max_abs_diff(&general, &contracted);
    let scale = 1.0f64.max(max_abs(&general));
    Ok(ConsistencyReport {
        general,
        contracted,
        max_deviation,
        tol,
        pass: max_deviation <= tol * scale,
    })
}
