//! Non-linear connections on a trivialized patch `U × ℝⁿ`, `U ⊆ ℝᵐ`.
//!
//! A connection is given by generalized Christoffel symbols `Γ^α_μ(x, f)`:
//! the projector onto the vertical bundle sends `∂/∂f^α` to itself and
//! `∂/∂x^μ` to `Σ_α Γ^α_μ ∂/∂f^α`. Indices in this API are zero-based.

use crate::error::{Error, Result};
use crate::expr::{parse, Dims, Expr, Var};
use crate::numcore::{directional, eval, gradient, EvalPoint};

/// Tolerance for identities that involve derivatives.
pub const DERIVATIVE_TOL: f64 = 1e-9;
/// Tolerance for purely algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BundlePatch {
    pub m: usize,
    pub n: usize,
    pub labels: Option<Vec<String>>,
}

impl BundlePatch {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "bundle patch needs m >= 1 and n >= 1, got m={m}, n={n}"
            )));
        }
        Ok(BundlePatch { m, n, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.m + self.n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coordinate labels, got {}",
                self.m + self.n,
                labels.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.m, self.n)
    }

    fn check_point(&self, p: &EvalPoint) -> Result<()> {
        if p.x.len() != self.m || p.f.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point has (m, n) = ({}, {}), patch has ({}, {})",
                p.x.len(),
                p.f.len(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }
}

fn shape_error(what: &str, expected: String) -> Error {
    Error::DimensionMismatch(format!("{what}: expected {expected}"))
}

/// A tangent vector `Σ a^μ ∂/∂x^μ + Σ b^α ∂/∂f^α` at `at`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalTangent {
    pub at: EvalPoint,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TotalTangent {
    pub fn embed(v: &VerticalVector) -> Self {
        TotalTangent {
            at: v.at.clone(),
            a: vec![0.0; v.at.x.len()],
            b: v.w.clone(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// A vertical tangent vector `Σ w^α ∂/∂f^α` at `at`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalVector {
    pub at: EvalPoint,
    pub w: Vec<f64>,
}

impl VerticalVector {
    pub fn norm(&self) -> f64 {
        self.w.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_deviation(&self, other: &VerticalVector) -> f64 {
        max_abs_diff(&self.w, &other.w)
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Local section `x ↦ (x, f(x))`; components depend on base coordinates only.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub patch: BundlePatch,
    pub comps: Vec<Expr>,
}

impl Section {
    pub fn new(patch: BundlePatch, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != patch.n {
            return Err(shape_error("section", format!("{} components", patch.n)));
        }
        for c in &comps {
            c.check_dims(patch.dims())?;
            if c.uses_fiber() {
                return Err(Error::DimensionMismatch(format!(
                    "section component `{c}` references fiber coordinates"
                )));
            }
        }
        Ok(Section { patch, comps })
    }

    pub fn parse<S: AsRef<str>>(patch: BundlePatch, comps: &[S]) -> Result<Self> {
        let dims = patch.dims();
        let comps = comps
            .iter()
            .map(|s| parse(s.as_ref(), dims))
            .collect::<Result<Vec<_>>>()?;
        Section::new(patch, comps)
    }

    pub fn zero(patch: BundlePatch) -> Self {
        let comps = vec![Expr::zero(); patch.n];
        Section { patch, comps }
    }

    /// The point `(x, s(x))` of the total space.
    pub fn point(&self, x: &[f64]) -> Result<EvalPoint> {
        if x.len() != self.patch.m {
            return Err(shape_error("base point", format!("{} coordinates", self.patch.m)));
        }
        let base = EvalPoint::new(x.to_vec(), vec![]);
        let f = self
            .comps
            .iter()
            .map(|c| eval(c, &base))
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalPoint::new(x.to_vec(), f))
    }
}

/// Vector field `Σ a^μ(x,f) ∂/∂x^μ + Σ b^α(x,f) ∂/∂f^α` on the total space.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalVectorField {
    pub patch: BundlePatch,
    pub a: Vec<Expr>,
    pub b: Vec<Expr>,
}

impl TotalVectorField {
    pub fn new(patch: BundlePatch, a: Vec<Expr>, b: Vec<Expr>) -> Result<Self> {
        if a.len() != patch.m || b.len() != patch.n {
            return Err(shape_error(
                "vector field",
                format!("{} base and {} fiber components", patch.m, patch.n),
            ));
        }
        for c in a.iter().chain(&b) {
            c.check_dims(patch.dims())?;
        }
        Ok(TotalVectorField { patch, a, b })
    }

    pub fn parse<S: AsRef<str>>(patch: BundlePatch, a: &[S], b: &[S]) -> Result<Self> {
        let dims = patch.dims();
        let p = |v: &[S]| {
            v.iter()
                .map(|s| parse(s.as_ref(), dims))
                .collect::<Result<Vec<_>>>()
        };
        let (a, b) = (p(a)?, p(b)?);
        TotalVectorField::new(patch, a, b)
    }

    /// The coordinate field `∂/∂x^mu`.
    pub fn coordinate_base(patch: BundlePatch, mu: usize) -> Self {
        let a = (0..patch.m)
            .map(|i| Expr::Const(if i == mu { 1.0 } else { 0.0 }))
            .collect();
        let b = vec![Expr::zero(); patch.n];
        TotalVectorField { patch, a, b }
    }

    pub fn at(&self, p: &EvalPoint) -> Result<TotalTangent> {
        self.patch.check_point(p)?;
        let ev = |v: &[Expr]| v.iter().map(|e| eval(e, p)).collect::<Result<Vec<_>>>();
        Ok(TotalTangent {
            at: p.clone(),
            a: ev(&self.a)?,
            b: ev(&self.b)?,
        })
    }

    pub fn is_vertical(&self) -> bool {
        self.a.iter().all(Expr::is_zero)
    }
}

/// `[V, W]^i = Σ_j V^j ∂_j W^i − W^j ∂_j V^i` over all `m + n` coordinates.
pub fn lie_bracket(v: &TotalVectorField, w: &TotalVectorField, p: &EvalPoint) -> Result<TotalTangent> {
    if v.patch.dims() != w.patch.dims() {
        return Err(Error::DimensionMismatch("vector fields live on different patches".into()));
    }
    let tv = v.at(p)?;
    let tw = w.at(p)?;
    let component = |ve: &Expr, we: &Expr| -> Result<f64> {
        let (_, v_dw) = directional(we, p, &tv.a, &tv.b)?;
        let (_, w_dv) = directional(ve, p, &tw.a, &tw.b)?;
        Ok(v_dw - w_dv)
    };
    let a = v
        .a
        .iter()
        .zip(&w.a)
        .map(|(ve, we)| component(ve, we))
        .collect::<Result<Vec<_>>>()?;
    let b = v
        .b
        .iter()
        .zip(&w.b)
        .map(|(ve, we)| component(ve, we))
        .collect::<Result<Vec<_>>>()?;
    Ok(TotalTangent { at: p.clone(), a, b })
}

/// `[V, W]` as an expression field, for nesting brackets.
pub fn bracket_field(v: &TotalVectorField, w: &TotalVectorField) -> Result<TotalVectorField> {
    if v.patch.dims() != w.patch.dims() {
        return Err(Error::DimensionMismatch("vector fields live on different patches".into()));
    }
    let (m, n) = (v.patch.m, v.patch.n);
    let coords: Vec<(Var, &Expr, &Expr)> = (0..m)
        .map(|i| (Var::X(i), &v.a[i], &w.a[i]))
        .chain((0..n).map(|a| (Var::F(a), &v.b[a], &w.b[a])))
        .collect();
    let component = |ve: &Expr, we: &Expr| {
        let plus = coords.iter().map(|(var, vj, _)| Expr::product((*vj).clone(), we.derivative(*var)));
        let minus = coords
            .iter()
            .map(|(var, _, wj)| Expr::product((*wj).clone(), ve.derivative(*var)).negated());
        Expr::sum(plus.chain(minus))
    };
    let a = v.a.iter().zip(&w.a).map(|(ve, we)| component(ve, we)).collect();
    let b = v.b.iter().zip(&w.b).map(|(ve, we)| component(ve, we)).collect();
    TotalVectorField::new(v.patch.clone(), a, b)
}

/// Curvature coefficients `R^α_{μν}` at a point, stored `[α][μ][ν]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureCoefficients {
    pub n: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl CurvatureCoefficients {
    pub fn get(&self, alpha: usize, mu: usize, nu: usize) -> f64 {
        self.data[(alpha * self.m + mu) * self.m + nu]
    }

    /// The vector `R^·_{μν}`.
    pub fn column(&self, mu: usize, nu: usize) -> Vec<f64> {
        (0..self.n).map(|a| self.get(a, mu, nu)).collect()
    }

    /// Largest `|R^α_{μν} + R^α_{νμ}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.n {
            for mu in 0..self.m {
                for nu in 0..self.m {
                    worst = worst.max((self.get(a, mu, nu) + self.get(a, nu, mu)).abs());
                }
            }
        }
        worst
    }
}

/// Generalized Christoffel symbols `Γ^α_μ(x, f)`, stored `gamma[α][μ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelField {
    pub patch: BundlePatch,
    pub gamma: Vec<Vec<Expr>>,
}

impl ChristoffelField {
    pub fn new(patch: BundlePatch, gamma: Vec<Vec<Expr>>) -> Result<Self> {
        if gamma.len() != patch.n || gamma.iter().any(|row| row.len() != patch.m) {
            return Err(shape_error(
                "Christoffel symbols",
                format!("{}×{} (fiber × base)", patch.n, patch.m),
            ));
        }
        for e in gamma.iter().flatten() {
            e.check_dims(patch.dims())?;
        }
        Ok(ChristoffelField { patch, gamma })
    }

    /// Parses `rows[α][μ]`.
    pub fn parse<S: AsRef<str>>(patch: BundlePatch, rows: &[Vec<S>]) -> Result<Self> {
        let dims = patch.dims();
        let gamma = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse(s.as_ref(), dims))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ChristoffelField::new(patch, gamma)
    }

    pub fn flat(patch: BundlePatch) -> Self {
        let gamma = vec![vec![Expr::zero(); patch.m]; patch.n];
        ChristoffelField { patch, gamma }
    }

    pub fn m(&self) -> usize {
        self.patch.m
    }

    pub fn n(&self) -> usize {
        self.patch.n
    }

    /// `Γ^·_·` evaluated at `p`, as `[α][μ]`.
    pub fn eval_at(&self, p: &EvalPoint) -> Result<Vec<Vec<f64>>> {
        self.patch.check_point(p)?;
        self.gamma
            .iter()
            .map(|row| row.iter().map(|e| eval(e, p)).collect())
            .collect()
    }

    /// Vertical projection `w^α = b^α + Σ_μ Γ^α_μ a^μ`.
    pub fn project(&self, t: &TotalTangent) -> Result<VerticalVector> {
        self.patch.check_point(&t.at)?;
        if t.a.len() != self.m() || t.b.len() != self.n() {
            return Err(shape_error("tangent", format!("({}, {}) components", self.m(), self.n())));
        }
        let g = self.eval_at(&t.at)?;
        let w = g
            .iter()
            .zip(&t.b)
            .map(|(row, b)| b + row.iter().zip(&t.a).map(|(gam, a)| gam * a).sum::<f64>())
            .collect();
        Ok(VerticalVector { at: t.at.clone(), w })
    }

    /// Horizontal lift `ξ^μ (∂/∂x^μ − Σ_α Γ^α_μ ∂/∂f^α)`.
    pub fn horizontal_lift(&self, p: &EvalPoint, xi: &[f64]) -> Result<TotalTangent> {
        if xi.len() != self.m() {
            return Err(shape_error("base vector", format!("{} components", self.m())));
        }
        let g = self.eval_at(p)?;
        let b = g
            .iter()
            .map(|row| -row.iter().zip(xi).map(|(gam, x)| gam * x).sum::<f64>())
            .collect();
        Ok(TotalTangent {
            at: p.clone(),
            a: xi.to_vec(),
            b,
        })
    }

    /// `D_μ s (x)` with components `∂s^α/∂x^μ + Γ^α_μ(x, s(x))`.
    pub fn covariant_derivative(&self, s: &Section, mu: usize, x: &[f64]) -> Result<VerticalVector> {
        if s.patch.dims() != self.patch.dims() {
            return Err(Error::DimensionMismatch("section and connection patches differ".into()));
        }
        if mu >= self.m() {
            return Err(shape_error("base index", format!("index below {}", self.m())));
        }
        let p = s.point(x)?;
        let base = EvalPoint::new(x.to_vec(), vec![]);
        let w = (0..self.n())
            .map(|alpha| {
                let ds = crate::numcore::partial(&s.comps[alpha], &base, Var::X(mu))?;
                Ok(ds + eval(&self.gamma[alpha][mu], &p)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VerticalVector { at: p, w })
    }

    /// `R^α_{μν} = ∂_μΓ^α_ν − ∂_νΓ^α_μ + Σ_β (Γ^β_ν ∂_{f^β}Γ^α_μ − Γ^β_μ ∂_{f^β}Γ^α_ν)`.
    pub fn curvature_coefficients(&self, p: &EvalPoint) -> Result<CurvatureCoefficients> {
        self.patch.check_point(p)?;
        let (m, n) = (self.m(), self.n());
        // grads[α][μ] = (value, ∂x, ∂f) of Γ^α_μ
        let grads = self
            .gamma
            .iter()
            .map(|row| row.iter().map(|e| gradient(e, p)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut data = vec![0.0; n * m * m];
        for alpha in 0..n {
            for mu in 0..m {
                for nu in 0..m {
                    if mu == nu {
                        continue;
                    }
                    let (_, dx_nu, df_nu) = &grads[alpha][nu];
                    let (_, dx_mu, df_mu) = &grads[alpha][mu];
                    let quad: f64 = (0..n)
                        .map(|beta| grads[beta][nu].0 * df_mu[beta] - grads[beta][mu].0 * df_nu[beta])
                        .sum();
                    data[(alpha * m + mu) * m + nu] = dx_nu[mu] - dx_mu[nu] + quad;
                }
            }
        }
        Ok(CurvatureCoefficients { n, m, data })
    }

    /// `(id − ℙ)V` as an expression field: `a = V.a`, `b^α = −Σ_μ Γ^α_μ a^μ`.
    pub fn horizontal_part(&self, v: &TotalVectorField) -> TotalVectorField {
        let b = self
            .gamma
            .iter()
            .map(|row| {
                Expr::sum(
                    row.iter()
                        .zip(&v.a)
                        .map(|(g, a)| Expr::product(g.clone(), a.clone())),
                )
                .negated()
            })
            .collect();
        TotalVectorField {
            patch: self.patch.clone(),
            a: v.a.clone(),
            b,
        }
    }

    /// `ℙV` as an expression field: `a = 0`, `b^α = V.b^α + Σ_μ Γ^α_μ a^μ`.
    pub fn vertical_part(&self, v: &TotalVectorField) -> TotalVectorField {
        let b = self
            .gamma
            .iter()
            .zip(&v.b)
            .map(|(row, vb)| {
                Expr::sum(
                    std::iter::once(vb.clone()).chain(
                        row.iter()
                            .zip(&v.a)
                            .map(|(g, a)| Expr::product(g.clone(), a.clone())),
                    ),
                )
            })
            .collect();
        TotalVectorField {
            patch: self.patch.clone(),
            a: vec![Expr::zero(); self.m()],
            b,
        }
    }

    /// Two-term form `−ℙ[(id−ℙ)V, (id−ℙ)W]`.
    pub fn nijenhuis_two_term(&self, v: &TotalVectorField, w: &TotalVectorField, p: &EvalPoint) -> Result<VerticalVector> {
        let hv = self.horizontal_part(v);
        let hw = self.horizontal_part(w);
        let br = lie_bracket(&hv, &hw, p)?;
        let mut r = self.project(&br)?;
        r.w.iter_mut().for_each(|c| *c = -*c);
        Ok(r)
    }

    /// Four-term form `−ℙ[V,W] + ℙ[V,ℙW] + ℙ[ℙV,W] − [ℙV,ℙW]`.
    pub fn nijenhuis_four_term(&self, v: &TotalVectorField, w: &TotalVectorField, p: &EvalPoint) -> Result<TotalTangent> {
        let pv = self.vertical_part(v);
        let pw = self.vertical_part(w);
        let t1 = self.project(&lie_bracket(v, w, p)?)?;
        let t2 = self.project(&lie_bracket(v, &pw, p)?)?;
        let t3 = self.project(&lie_bracket(&pv, w, p)?)?;
        let t4 = lie_bracket(&pv, &pw, p)?;
        let b = (0..self.n())
            .map(|i| -t1.w[i] + t2.w[i] + t3.w[i] - t4.b[i])
            .collect();
        Ok(TotalTangent {
            at: p.clone(),
            a: t4.a.iter().map(|c| -c).collect(),
            b,
        })
    }

    /// Curvature `R(V, W)` at `p`, computed from the two-term form and
    /// checked against the four-term definition.
    pub fn nijenhuis_curvature(&self, v: &TotalVectorField, w: &TotalVectorField, p: &EvalPoint) -> Result<VerticalVector> {
        if v.patch.dims() != self.patch.dims() || w.patch.dims() != self.patch.dims() {
            return Err(Error::DimensionMismatch("vector fields and connection live on different patches".into()));
        }
        let two = self.nijenhuis_two_term(v, w, p)?;
        let four = self.nijenhuis_four_term(v, w, p)?;
        let scale = 1.0f64.max(max_abs(&two.w)).max(max_abs(&four.b));
        let deviation = max_abs_diff(&two.w, &four.b).max(max_abs(&four.a));
        if deviation > DERIVATIVE_TOL * scale {
            return Err(Error::InternalDisagreement {
                what: "Nijenhuis curvature (two-term vs four-term)",
                deviation,
            });
        }
        Ok(two)
    }

    /// Curvature on the coordinate horizontal lifts of `∂/∂x^μ`, `∂/∂x^ν`.
    pub fn nijenhuis_coordinate(&self, mu: usize, nu: usize, p: &EvalPoint) -> Result<VerticalVector> {
        let v = TotalVectorField::coordinate_base(self.patch.clone(), mu);
        let w = TotalVectorField::coordinate_base(self.patch.clone(), nu);
        self.nijenhuis_curvature(&v, &w, p)
    }
}

/// Fiber-preserving map `(x, f) ↦ (x, φ(x, f))` between patches over the
/// same base.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberBundleMorphism {
    pub source: BundlePatch,
    pub target: BundlePatch,
    pub comps: Vec<Expr>,
}

impl FiberBundleMorphism {
    pub fn new(source: BundlePatch, target: BundlePatch, comps: Vec<Expr>) -> Result<Self> {
        if source.m != target.m {
            return Err(Error::DimensionMismatch("morphism source and target have different bases".into()));
        }
        if comps.len() != target.n {
            return Err(shape_error("morphism", format!("{} components", target.n)));
        }
        for c in &comps {
            c.check_dims(source.dims())?;
        }
        Ok(FiberBundleMorphism { source, target, comps })
    }

    pub fn parse<S: AsRef<str>>(source: BundlePatch, target: BundlePatch, comps: &[S]) -> Result<Self> {
        let dims = source.dims();
        let comps = comps
            .iter()
            .map(|s| parse(s.as_ref(), dims))
            .collect::<Result<Vec<_>>>()?;
        FiberBundleMorphism::new(source, target, comps)
    }

    pub fn identity(patch: BundlePatch) -> Self {
        let comps = (0..patch.n).map(Expr::f).collect();
        FiberBundleMorphism {
            source: patch.clone(),
            target: patch,
            comps,
        }
    }

    pub fn apply(&self, p: &EvalPoint) -> Result<EvalPoint> {
        self.source.check_point(p)?;
        let f = self.comps.iter().map(|c| eval(c, p)).collect::<Result<Vec<_>>>()?;
        Ok(EvalPoint::new(p.x.clone(), f))
    }

    /// Differential `φ_* t`; base components pass through.
    pub fn pushforward(&self, t: &TotalTangent) -> Result<TotalTangent> {
        let at = self.apply(&t.at)?;
        let b = self
            .comps
            .iter()
            .map(|c| directional(c, &t.at, &t.a, &t.b).map(|(_, d)| d))
            .collect::<Result<Vec<_>>>()?;
        Ok(TotalTangent { at, a: t.a.clone(), b })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelReport {
    /// Per sample, the largest `|ℙ̂ φ_* h_μ|` over the horizontal basis.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub parallel: bool,
}

/// Tests whether `φ_*` maps the horizontal distribution of `g` into that
/// of `g_hat` at every sample.
pub fn is_parallel_morphism(
    phi: &FiberBundleMorphism,
    g: &ChristoffelField,
    g_hat: &ChristoffelField,
    samples: &[EvalPoint],
    tol: f64,
) -> Result<ParallelReport> {
    if phi.source.dims() != g.patch.dims() || phi.target.dims() != g_hat.patch.dims() {
        return Err(Error::DimensionMismatch("morphism does not map between the connection patches".into()));
    }
    let m = g.m();
    let mut residuals = Vec::with_capacity(samples.len());
    for p in samples {
        let mut worst = 0.0f64;
        for mu in 0..m {
            let mut e = vec![0.0; m];
            e[mu] = 1.0;
            let h = g.horizontal_lift(p, &e)?;
            let pushed = phi.pushforward(&h)?;
            worst = worst.max(g_hat.project(&pushed)?.norm());
        }
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ParallelReport {
        residuals,
        max_residual,
        tol,
        parallel: max_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch(m: usize, n: usize) -> BundlePatch {
        BundlePatch::new(m, n).unwrap()
    }

    fn field(m: usize, n: usize, rows: &[&[&str]]) -> ChristoffelField {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        ChristoffelField::parse(patch(m, n), &rows).unwrap()
    }

    fn pt(x: &[f64], f: &[f64]) -> EvalPoint {
        EvalPoint::new(x.to_vec(), f.to_vec())
    }

    #[test]
    fn patch_requires_positive_dims() {
        assert!(BundlePatch::new(0, 1).is_err());
        assert!(BundlePatch::new(1, 0).is_err());
    }

    #[test]
    fn project_examples() {
        let flat = ChristoffelField::flat(patch(1, 1));
        let t = TotalTangent { at: pt(&[0.3], &[0.1]), a: vec![1.0], b: vec![0.0] };
        assert_eq!(flat.project(&t).unwrap().w, vec![0.0]);

        let g = field(1, 1, &[&["f1"]]);
        let vert = TotalTangent { at: pt(&[0.3], &[0.1]), a: vec![0.0], b: vec![3.0] };
        assert_eq!(g.project(&vert).unwrap().w, vec![3.0]);

        let t = TotalTangent { at: pt(&[1.0], &[2.0]), a: vec![1.0], b: vec![0.0] };
        assert_eq!(g.project(&t).unwrap().w, vec![2.0]);
    }

    #[test]
    fn horizontal_lift_examples() {
        let flat = ChristoffelField::flat(patch(2, 1));
        let h = flat.horizontal_lift(&pt(&[0.0, 0.0], &[0.0]), &[1.0, 0.0]).unwrap();
        assert_eq!((h.a, h.b), (vec![1.0, 0.0], vec![0.0]));

        let g = field(2, 1, &[&["0", "x1"]]);
        let h = g.horizontal_lift(&pt(&[2.0, 0.0], &[0.0]), &[0.0, 1.0]).unwrap();
        assert_eq!((h.a.clone(), h.b.clone()), (vec![0.0, 1.0], vec![-2.0]));
        assert_eq!(g.project(&h).unwrap().w, vec![0.0]);

        let z = g.horizontal_lift(&pt(&[2.0, 0.0], &[0.0]), &[0.0, 0.0]).unwrap();
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn covariant_derivative_examples() {
        let flat = ChristoffelField::flat(patch(1, 1));
        let s = Section::parse(patch(1, 1), &["x1^2"]).unwrap();
        assert_eq!(flat.covariant_derivative(&s, 0, &[3.0]).unwrap().w, vec![6.0]);

        // −e^{−x} + e^{−x} = 0
        let g = field(1, 1, &[&["f1"]]);
        let s = Section::parse(patch(1, 1), &["exp(-x1)"]).unwrap();
        assert_eq!(g.covariant_derivative(&s, 0, &[0.0]).unwrap().w, vec![0.0]);

        let g = field(2, 1, &[&["0", "x1"]]);
        let s = Section::zero(patch(2, 1));
        assert_eq!(g.covariant_derivative(&s, 1, &[1.0, 0.0]).unwrap().w, vec![1.0]);
    }

    #[test]
    fn section_rejects_fiber_variables() {
        assert!(Section::parse(patch(1, 1), &["f1"]).is_err());
    }

    #[test]
    fn lie_bracket_examples() {
        let pa = patch(1, 1);
        let v = TotalVectorField::parse(pa.clone(), &["1"], &["0"]).unwrap();
        let w = TotalVectorField::parse(pa.clone(), &["0"], &["x1"]).unwrap();
        let br = lie_bracket(&v, &w, &pt(&[0.4], &[-2.0])).unwrap();
        assert_eq!((br.a, br.b), (vec![0.0], vec![1.0]));

        let same = lie_bracket(&w, &w, &pt(&[0.4], &[-2.0])).unwrap();
        assert_eq!(same.norm(), 0.0);

        let v = TotalVectorField::parse(pa.clone(), &["0"], &["f1"]).unwrap();
        let w = TotalVectorField::parse(pa, &["0"], &["1"]).unwrap();
        let br = lie_bracket(&v, &w, &pt(&[0.0], &[5.0])).unwrap();
        assert_eq!(br.b, vec![-1.0]);
    }

    #[test]
    fn nijenhuis_examples() {
        let g = field(2, 1, &[&["0", "x1"]]);
        let p = pt(&[0.7, -0.2], &[1.5]);
        assert_eq!(g.nijenhuis_coordinate(0, 1, &p).unwrap().w, vec![1.0]);

        let vertical = TotalVectorField::parse(g.patch.clone(), &["0", "0"], &["f1*x2"]).unwrap();
        let other = TotalVectorField::parse(g.patch.clone(), &["x2", "1"], &["f1"]).unwrap();
        assert_eq!(g.nijenhuis_curvature(&vertical, &other, &p).unwrap().w, vec![0.0]);
        assert_eq!(g.nijenhuis_curvature(&other, &vertical, &p).unwrap().w, vec![0.0]);

        let flat = ChristoffelField::flat(g.patch.clone());
        assert_eq!(flat.nijenhuis_curvature(&other, &TotalVectorField::coordinate_base(g.patch.clone(), 0), &p).unwrap().w, vec![0.0]);
    }

    #[test]
    fn curvature_coefficient_examples() {
        let flat = ChristoffelField::flat(patch(2, 2));
        let c = flat.curvature_coefficients(&pt(&[0.1, 0.2], &[0.3, 0.4])).unwrap();
        assert!(c.data.iter().all(|&r| r == 0.0));

        let g = field(2, 1, &[&["0", "x1"]]);
        for p in [pt(&[0.0, 0.0], &[0.0]), pt(&[3.0, -1.0], &[7.0])] {
            let c = g.curvature_coefficients(&p).unwrap();
            assert_eq!(c.get(0, 0, 1), 1.0);
            assert_eq!(c.get(0, 1, 0), -1.0);
        }

        // f + x¹f² at f = 1, x¹ = 1
        let g = field(2, 1, &[&["f1^2", "x1*f1"]]);
        let c = g.curvature_coefficients(&pt(&[1.0, 0.0], &[1.0])).unwrap();
        assert_eq!(c.get(0, 0, 1), 2.0);
    }

    #[test]
    fn base_dimension_one_has_zero_curvature() {
        let g = field(1, 2, &[&["f1*f2 + x1"], &["sin(f1)*x1^2"]]);
        let c = g.curvature_coefficients(&pt(&[0.5], &[0.2, -0.9])).unwrap();
        assert_eq!(c.data, vec![0.0, 0.0]);
    }

    #[test]
    fn parallel_morphism_examples() {
        let pa = patch(1, 1);
        let samples = vec![pt(&[0.3], &[1.0]), pt(&[-0.5], &[-2.0])];

        let g = field(1, 1, &[&["x1*f1^2 + sin(f1)"]]);
        let id = FiberBundleMorphism::identity(pa.clone());
        let r = is_parallel_morphism(&id, &g, &g, &samples, 1e-12).unwrap();
        assert!(r.parallel);
        assert_eq!(r.max_residual, 0.0);

        let scale = FiberBundleMorphism::parse(pa.clone(), pa.clone(), &["2*f1"]).unwrap();
        let lin = field(1, 1, &[&["f1"]]);
        let r = is_parallel_morphism(&scale, &lin, &lin, &samples, 1e-12).unwrap();
        assert!(r.parallel);

        let quad = field(1, 1, &[&["f1^2"]]);
        let r = is_parallel_morphism(&scale, &quad, &quad, &[pt(&[0.0], &[1.0])], 1e-9).unwrap();
        assert!(!r.parallel);
        assert_eq!(r.max_residual, 2.0);
    }
}
