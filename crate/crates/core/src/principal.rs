//! Principal connections on a trivialized patch `U × G` for a matrix group
//! `G`.
//!
//! The connection is fixed by its gauge potential `A = Σ A^a_μ(x) E_a dx^μ`,
//! the pullback of the connection form along the unit section. On the
//! patch the form reads `ω_{(x,g)}(ξ, gV) = Ad_{g⁻¹} A_x(ξ) + V`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::bundle::{BundlePatch, ChristoffelField, Section, TotalVectorField};
use crate::error::{Error, Result};
use crate::expr::{parse, Dims, Expr, Var};
use crate::lie::{expm, AlgebraElement, GroupElement, MatJet, MatrixLieAlgebra};
use crate::numcore::{eval, mixed_second, partial, EvalPoint};
use crate::prolong::commutator_curvature;
use crate::sampling::SampleRng;

/// Residual allowed when testing whether a fiber velocity is vertical.
pub const VERTICAL_TOL: f64 = 1e-8;
/// Largest algebra norm of an exponential chart coordinate.
pub const CHART_RADIUS: f64 = 0.5;
/// Degree at which the chart's Christoffel series is truncated.
pub const CHART_DEGREE: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GaugePotential {
    pub algebra: MatrixLieAlgebra,
    pub m: usize,
    /// `comps[a][μ] = A^a_μ(x)`.
    pub comps: Vec<Vec<Expr>>,
}

impl GaugePotential {
    pub fn new(algebra: MatrixLieAlgebra, m: usize, comps: Vec<Vec<Expr>>) -> Result<Self> {
        if m == 0 || comps.len() != algebra.k || comps.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "gauge potential must be {}×{m} (algebra × base)",
                algebra.k
            )));
        }
        for e in comps.iter().flatten() {
            e.check_dims(Dims::new(m, 0))?;
        }
        Ok(GaugePotential { algebra, m, comps })
    }

    /// Parses `rows[a][μ]`.
    pub fn parse<S: AsRef<str>>(algebra: MatrixLieAlgebra, m: usize, rows: &[Vec<S>]) -> Result<Self> {
        let dims = Dims::new(m, 0);
        let comps = rows
            .iter()
            .map(|r| r.iter().map(|s| parse(s.as_ref(), dims)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        GaugePotential::new(algebra, m, comps)
    }

    pub fn zero(algebra: MatrixLieAlgebra, m: usize) -> Self {
        let comps = vec![vec![Expr::zero(); m]; algebra.k];
        GaugePotential { algebra, m, comps }
    }

    fn base(&self, x: &[f64]) -> Result<EvalPoint> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "base point has {} coordinates, expected {}",
                x.len(),
                self.m
            )));
        }
        Ok(EvalPoint::new(x.to_vec(), vec![]))
    }

    /// `A_μ(x)`.
    pub fn component(&self, mu: usize, x: &[f64]) -> Result<AlgebraElement> {
        let p = self.base(x)?;
        let c = self.comps.iter().map(|r| eval(&r[mu], &p)).collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement::new(c))
    }

    /// `∂A_μ/∂x^ν (x)`.
    pub fn component_partial(&self, mu: usize, nu: usize, x: &[f64]) -> Result<AlgebraElement> {
        let p = self.base(x)?;
        let c = self
            .comps
            .iter()
            .map(|r| partial(&r[mu], &p, Var::X(nu)))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement::new(c))
    }

    /// `A_x(ξ) = Σ_μ ξ^μ A_μ(x)`.
    pub fn contract(&self, x: &[f64], xi: &[f64]) -> Result<AlgebraElement> {
        if xi.len() != self.m {
            return Err(Error::DimensionMismatch("base vector has the wrong length".into()));
        }
        let mut out = self.algebra.zero();
        for (mu, &c) in xi.iter().enumerate() {
            out = &out + &(&self.component(mu, x)? * c);
        }
        Ok(out)
    }
}

/// Tangent vector at `(x, g)` with base part `xi` and fiber velocity `g·v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalTangent {
    pub x: Vec<f64>,
    pub g: GroupElement,
    pub xi: Vec<f64>,
    pub v: AlgebraElement,
}

/// `ω(t) = Ad_{g⁻¹} A_x(ξ) + V`.
pub fn omega_eval(p: &GaugePotential, t: &PrincipalTangent) -> Result<AlgebraElement> {
    let a = p.contract(&t.x, &t.xi)?;
    let ad = p.algebra.adjoint(&t.g.inverse()?, &a)?;
    if t.v.dim() != p.algebra.k {
        return Err(Error::DimensionMismatch("fiber component has the wrong dimension".into()));
    }
    Ok(&ad + &t.v)
}

/// Coefficients of `g0⁻¹W` for a fiber velocity `W` at `g0`.
pub fn vtriv_principal(algebra: &MatrixLieAlgebra, g0: &GroupElement, w: &DMatrix<f64>) -> Result<AlgebraElement> {
    let m = g0.inverse()?.g * w;
    let (x, residual) = algebra.fit(&m)?;
    if residual > VERTICAL_TOL * m.norm().max(1.0) {
        return Err(Error::NotVertical { residual });
    }
    Ok(x)
}

/// Field strength `F^a_{μν}` at a point, stored `[(μ·m + ν)·k + a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub m: usize,
    pub k: usize,
    pub data: Vec<f64>,
}

impl CurvatureField {
    pub fn get(&self, mu: usize, nu: usize) -> AlgebraElement {
        let start = (mu * self.m + nu) * self.k;
        AlgebraElement::new(self.data[start..start + self.k].to_vec())
    }
}

/// `F_{μν} = ∂_μA_ν − ∂_νA_μ + [A_μ, A_ν]`.
pub fn cartan_curvature(p: &GaugePotential, x: &[f64]) -> Result<CurvatureField> {
    let (m, k) = (p.m, p.algebra.k);
    let mut data = vec![0.0; m * m * k];
    for mu in 0..m {
        for nu in mu + 1..m {
            let d = &p.component_partial(nu, mu, x)? - &p.component_partial(mu, nu, x)?;
            let br = p.algebra.bracket(&p.component(mu, x)?, &p.component(nu, x)?)?;
            let f = &d + &br;
            for a in 0..k {
                data[(mu * m + nu) * k + a] = f.coeffs[a];
                data[(nu * m + mu) * k + a] = -f.coeffs[a];
            }
        }
    }
    Ok(CurvatureField { m, k, data })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub trials: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Central difference with one Richardson step.
fn richardson(f: &dyn Fn(f64) -> DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

const AXIOM_STEP: f64 = 1e-5;

/// Checks `ω_{g₀γ₀}(d/dt g_tγ_t) = Ad_{γ₀⁻¹} ω_{g₀}(ġ) + γ₀⁻¹γ̇` on random
/// curves `g_t = g₀e^{tX}` over `x₀ + tξ` and `γ_t = γ₀e^{tY}`.
pub fn check_axiom(p: &GaugePotential, trials: usize, tol: f64, rng: &mut SampleRng) -> Result<AxiomReport> {
    check_axiom_with(p, &|t| omega_eval(p, t), trials, tol, rng)
}

/// [`check_axiom`] against an arbitrary evaluator of the connection form.
pub fn check_axiom_with(
    p: &GaugePotential,
    omega: &dyn Fn(&PrincipalTangent) -> Result<AlgebraElement>,
    trials: usize,
    tol: f64,
    rng: &mut SampleRng,
) -> Result<AxiomReport> {
    let alg = &p.algebra;
    let k = alg.k;
    let mut max_residual = 0.0f64;
    for _ in 0..trials {
        let x0 = rng.vector(p.m, -1.0, 1.0);
        let xi = rng.vector(p.m, -1.0, 1.0);
        let g0 = alg.exp(&AlgebraElement::new(rng.vector(k, -1.0, 1.0)))?;
        let gamma0 = alg.exp(&AlgebraElement::new(rng.vector(k, -1.0, 1.0)))?;
        let xm = alg.matrix(&AlgebraElement::new(rng.vector(k, -1.0, 1.0)));
        let ym = alg.matrix(&AlgebraElement::new(rng.vector(k, -1.0, 1.0)));

        let g_t = |t: f64| &g0.g * expm(&(&xm * t));
        let gamma_t = |t: f64| &gamma0.g * expm(&(&ym * t));
        let prod_t = |t: f64| g_t(t) * gamma_t(t);

        let g_dot = richardson(&g_t, AXIOM_STEP);
        let gamma_dot = richardson(&gamma_t, AXIOM_STEP);
        let prod_dot = richardson(&prod_t, AXIOM_STEP);

        let h0 = g0.mul(&gamma0);
        let lhs = omega(&PrincipalTangent {
            x: x0.clone(),
            g: h0.clone(),
            xi: xi.clone(),
            v: vtriv_principal(alg, &h0, &prod_dot)?,
        })?;
        let at_g0 = omega(&PrincipalTangent {
            x: x0,
            g: g0.clone(),
            xi,
            v: vtriv_principal(alg, &g0, &g_dot)?,
        })?;
        let rhs = &alg.adjoint(&gamma0.inverse()?, &at_g0)? + &vtriv_principal(alg, &gamma0, &gamma_dot)?;
        max_residual = max_residual.max(lhs.max_deviation(&rhs));
    }
    Ok(AxiomReport {
        trials,
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

// Bernoulli numbers B_0..B_10 with B_1 = -1/2.
const BERNOULLI: [f64; 11] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
];

type Poly = BTreeMap<Vec<u32>, f64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0.0);
    out
}

fn poly_add_scaled(acc: &mut Poly, a: &Poly, s: f64) {
    for (e, c) in a {
        *acc.entry(e.clone()).or_insert(0.0) += c * s;
    }
    acc.retain(|_, c| *c != 0.0);
}

fn poly_expr(p: &Poly) -> Expr {
    Expr::sum(p.iter().map(|(e, &c)| {
        e.iter().enumerate().filter(|(_, &k)| k > 0).fold(Expr::constant(c), |acc, (a, &k)| {
            let v = Expr::f(a);
            Expr::product(acc, if k == 1 { v } else { v.powi(k as i32) })
        })
    }))
}

/// Exponential chart `u ↦ g₀·exp(Σ u^a E_a)` of the fiber around `g₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpChart {
    pub algebra: MatrixLieAlgebra,
    pub g0: GroupElement,
}

impl ExpChart {
    pub fn new(algebra: MatrixLieAlgebra, g0: GroupElement) -> Result<Self> {
        if g0.d() != algebra.d {
            return Err(Error::DimensionMismatch("chart center does not match the algebra".into()));
        }
        Ok(ExpChart { algebra, g0 })
    }

    pub fn point(&self, u: &[f64]) -> GroupElement {
        let s = self.algebra.matrix(&AlgebraElement::new(u.to_vec()));
        GroupElement { g: &self.g0.g * expm(&s) }
    }

    /// Christoffel symbols of the principal connection in this chart:
    /// `Γ_μ(x, u) = Σ_j B_j/j! ad_U^j Ad_{g₀⁻¹} A_μ(x)`, truncated at
    /// degree [`CHART_DEGREE`].
    pub fn christoffel(&self, p: &GaugePotential) -> Result<ChristoffelField> {
        let alg = &self.algebra;
        let k = alg.k;
        // ad_U in the basis: (ad_U)^c_b = Σ_a u^a c^c_{ab}
        let linear = |a: usize| {
            let mut e = vec![0u32; k];
            e[a] = 1;
            e
        };
        let ad: Vec<Vec<Poly>> = (0..k)
            .map(|c| {
                (0..k)
                    .map(|b| {
                        let mut p = Poly::new();
                        for a in 0..k {
                            let s = alg.structure_constant(a, b, c);
                            if s != 0.0 {
                                p.insert(linear(a), s);
                            }
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        let one = |i: usize, j: usize| {
            let mut p = Poly::new();
            if i == j {
                p.insert(vec![0; k], 1.0);
            }
            p
        };
        let mut power: Vec<Vec<Poly>> = (0..k).map(|i| (0..k).map(|j| one(i, j)).collect()).collect();
        let mut series = power.clone();
        let mut factorial = 1.0;
        for (j, &bj) in BERNOULLI.iter().enumerate().take(CHART_DEGREE + 1).skip(1) {
            factorial *= j as f64;
            power = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|l| {
                            let mut acc = Poly::new();
                            for q in 0..k {
                                poly_add_scaled(&mut acc, &poly_mul(&ad[i][q], &power[q][l]), 1.0);
                            }
                            acc
                        })
                        .collect()
                })
                .collect();
            if bj != 0.0 {
                for i in 0..k {
                    for l in 0..k {
                        poly_add_scaled(&mut series[i][l], &power[i][l], bj / factorial);
                    }
                }
            }
        }

        // Ad_{g₀⁻¹} in the basis, column b = coefficients of g₀⁻¹ E_b g₀
        let g0_inv = self.g0.inverse()?;
        let ad_g0: Vec<AlgebraElement> = (0..k)
            .map(|b| alg.adjoint(&g0_inv, &alg.basis_element(b)))
            .collect::<Result<_>>()?;
        let patch = BundlePatch::new(p.m, k)?;
        let gamma = (0..k)
            .map(|c| {
                (0..p.m)
                    .map(|mu| {
                        let rotated: Vec<Expr> = (0..k)
                            .map(|b| {
                                Expr::sum((0..k).map(|a| {
                                    Expr::product(Expr::constant(ad_g0[a].coeffs[b]), p.comps[a][mu].clone())
                                }))
                            })
                            .collect();
                        Expr::sum((0..k).map(|b| Expr::product(poly_expr(&series[c][b]), rotated[b].clone())))
                    })
                    .collect()
            })
            .collect();
        ChristoffelField::new(patch, gamma)
    }

    /// Vertical trivialization of the chart vector `Σ w^a ∂/∂u^a` at `u`.
    pub fn vtriv(&self, u: &[f64], w: &[f64]) -> Result<AlgebraElement> {
        let alg = &self.algebra;
        let s = alg.matrix(&AlgebraElement::new(u.to_vec()));
        let r = alg.matrix(&AlgebraElement::new(w.to_vec()));
        let z = DMatrix::zeros(alg.d, alg.d);
        let jet = MatJet { v: s, d1: r, d2: z.clone(), d12: z }.exp();
        let g = GroupElement { g: &self.g0.g * &jet.v };
        vtriv_principal(alg, &g, &(&self.g0.g * &jet.d1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheckEntry {
    pub mu: usize,
    pub nu: usize,
    pub cartan: AlgebraElement,
    pub nijenhuis: AlgebraElement,
    pub commutator: AlgebraElement,
    pub reduced: AlgebraElement,
}

impl CrossCheckEntry {
    pub fn max_deviation(&self) -> f64 {
        let all = [&self.cartan, &self.nijenhuis, &self.commutator, &self.reduced];
        let mut worst = 0.0f64;
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                worst = worst.max(a.max_deviation(b));
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheckReport {
    pub entries: Vec<CrossCheckEntry>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Reduced covariant derivatives `a_μ = G⁻¹A_μG + G⁻¹∂_μG` of the section
/// `G(x) = g₀·exp(S(x))` together with `∂_μ a_ν` and `∂_ν a_μ`.
fn reduced_pair(
    p: &GaugePotential,
    chart: &ExpChart,
    s: &Section,
    mu: usize,
    nu: usize,
    x: &[f64],
) -> Result<[AlgebraElement; 4]> {
    let alg = &p.algebra;
    let base = EvalPoint::new(x.to_vec(), vec![]);
    let z = DMatrix::zeros(alg.d, alg.d);
    let mut sj = MatJet::constant(z.clone());
    for (a, e) in s.comps.iter().enumerate() {
        let basis = &alg.basis[a];
        sj.v += basis * eval(e, &base)?;
        sj.d1 += basis * partial(e, &base, Var::X(mu))?;
        sj.d2 += basis * partial(e, &base, Var::X(nu))?;
        sj.d12 += basis * mixed_second(e, &base, Var::X(mu), Var::X(nu))?;
    }
    let g = MatJet::constant(chart.g0.g.clone()).mul(&sj.exp());
    let gi = g.inverse()?;
    let a_mu = alg.matrix(&p.component(mu, x)?);
    let a_nu = alg.matrix(&p.component(nu, x)?);
    let da_nu_mu = alg.matrix(&p.component_partial(nu, mu, x)?);
    let da_mu_nu = alg.matrix(&p.component_partial(mu, nu, x)?);

    let red_mu = &gi.v * (&a_mu * &g.v + &g.d1);
    let red_nu = &gi.v * (&a_nu * &g.v + &g.d2);
    let d_mu_red_nu = &gi.d1 * (&a_nu * &g.v + &g.d2) + &gi.v * (&da_nu_mu * &g.v + &a_nu * &g.d1 + &g.d12);
    let d_nu_red_mu = &gi.d2 * (&a_mu * &g.v + &g.d1) + &gi.v * (&da_mu_nu * &g.v + &a_mu * &g.d2 + &g.d12);
    Ok([
        alg.coefficients(&red_mu)?,
        alg.coefficients(&red_nu)?,
        alg.coefficients(&d_mu_red_nu)?,
        alg.coefficients(&d_nu_red_mu)?,
    ])
}

/// Compares four routes to the curvature at `x`, all expressed in the
/// vertical trivialization at `G(x) = g₀·exp(S(x))`:
/// `Ad_{G⁻¹}F`; the Nijenhuis curvature of the connection written in the
/// exponential chart; the Θ-twisted commutator of second covariant
/// derivatives in that chart; and the Θ-twisted difference of the reduced
/// second derivatives of the section.
pub fn curvature_cross_check(
    p: &GaugePotential,
    chart: &ExpChart,
    section: &[Expr],
    x: &[f64],
    tol: f64,
) -> Result<CrossCheckReport> {
    let alg = &p.algebra;
    if chart.algebra != *alg {
        return Err(Error::DimensionMismatch("chart and potential use different algebras".into()));
    }
    let gamma = chart.christoffel(p)?;
    let s = Section::new(gamma.patch.clone(), section.to_vec())?;
    let pt = s.point(x)?;
    let u = pt.f.clone();
    let radius = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    if radius > CHART_RADIUS {
        return Err(Error::Domain(format!(
            "section leaves the exponential chart: |u| = {radius} > {CHART_RADIUS}"
        )));
    }
    let g = chart.point(&u);
    let g_inv = g.inverse()?;
    let f = cartan_curvature(p, x)?;

    let mut entries = Vec::new();
    for mu in 0..p.m {
        for nu in mu + 1..p.m {
            let cartan = alg.adjoint(&g_inv, &f.get(mu, nu))?;

            let v = TotalVectorField::coordinate_base(gamma.patch.clone(), mu);
            let w = TotalVectorField::coordinate_base(gamma.patch.clone(), nu);
            let nij = gamma.nijenhuis_curvature(&v, &w, &pt)?;
            let nijenhuis = chart.vtriv(&u, &nij.w)?;

            let comm = commutator_curvature(&gamma, &s, mu, nu, x)?;
            let commutator = chart.vtriv(&u, &comm.w)?;

            let [a_mu, a_nu, d_mu_a_nu, d_nu_a_mu] = reduced_pair(p, chart, &s, mu, nu, x)?;
            let first_z = &d_mu_a_nu + &alg.bracket(&a_mu, &a_nu)?;
            let second_z = &d_nu_a_mu + &alg.bracket(&a_nu, &a_mu)?;
            let (_, _, _, twisted_z) = theta_bch(alg, &g, &a_mu, &a_nu, &second_z)?;
            let reduced = &first_z - &twisted_z;

            entries.push(CrossCheckEntry {
                mu,
                nu,
                cartan,
                nijenhuis,
                commutator,
                reduced,
            });
        }
    }
    let max_deviation = entries.iter().map(CrossCheckEntry::max_deviation).fold(0.0, f64::max);
    Ok(CrossCheckReport {
        entries,
        max_deviation,
        tol,
        pass: max_deviation <= tol,
    })
}

/// `Θ(g, X; Y, Z) = (g, Y; X, Z + [X, Y])`.
pub fn theta_bch(
    algebra: &MatrixLieAlgebra,
    g: &GroupElement,
    x: &AlgebraElement,
    y: &AlgebraElement,
    z: &AlgebraElement,
) -> Result<(GroupElement, AlgebraElement, AlgebraElement, AlgebraElement)> {
    let br = algebra.bracket(x, y)?;
    Ok((g.clone(), y.clone(), x.clone(), z + &br))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BchReport {
    /// Slots read off `g·e^{tX}·e^{ε(Y+tZ)}`.
    pub direct: (AlgebraElement, AlgebraElement, AlgebraElement),
    /// Slots read off the same surface with `t` and `ε` exchanged.
    pub swapped: (AlgebraElement, AlgebraElement, AlgebraElement),
    /// `theta_bch` applied to the input.
    pub expected: (AlgebraElement, AlgebraElement, AlgebraElement),
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

const BCH_STEP: f64 = 1e-4;

/// Reads `(X, Y, Z)` off a surface `γ(t, ε)` through `g` by central
/// differences; returns the slots and the largest fit residual.
fn read_slots(
    alg: &MatrixLieAlgebra,
    g: &GroupElement,
    surface: &dyn Fn(f64, f64) -> DMatrix<f64>,
) -> Result<((AlgebraElement, AlgebraElement, AlgebraElement), f64)> {
    let h = BCH_STEP;
    let gi = g.inverse()?;
    let dt = (surface(h, 0.0) - surface(-h, 0.0)) / (2.0 * h);
    let de = (surface(0.0, h) - surface(0.0, -h)) / (2.0 * h);
    let dte = (surface(h, h) - surface(h, -h) - surface(-h, h) + surface(-h, -h)) / (4.0 * h * h);
    let xm = &gi.g * dt;
    let ym = &gi.g * de;
    let zm = &gi.g * dte - &xm * &ym;
    let (x, rx) = alg.fit(&xm)?;
    let (y, ry) = alg.fit(&ym)?;
    let (z, rz) = alg.fit(&zm)?;
    Ok(((x, y, z), rx.max(ry).max(rz)))
}

/// Recovers the twisted slots of `theta_bch` from the surface
/// `g·e^{tX}·e^{ε(Y+tZ)}` read with `t` and `ε` exchanged.
pub fn theta_bch_verify(
    algebra: &MatrixLieAlgebra,
    g: &GroupElement,
    x: &AlgebraElement,
    y: &AlgebraElement,
    z: &AlgebraElement,
    tol: f64,
) -> Result<BchReport> {
    let (xm, ym, zm) = (algebra.matrix(x), algebra.matrix(y), algebra.matrix(z));
    let surface = |t: f64, e: f64| &g.g * expm(&(&xm * t)) * expm(&((&ym + &zm * t) * e));
    let swapped_surface = |t: f64, e: f64| surface(e, t);
    let (direct, r1) = read_slots(algebra, g, &surface)?;
    let (swapped, r2) = read_slots(algebra, g, &swapped_surface)?;
    let (_, ex, ey, ez) = theta_bch(algebra, g, x, y, z)?;
    let max_deviation = [
        direct.0.max_deviation(x),
        direct.1.max_deviation(y),
        direct.2.max_deviation(z),
        swapped.0.max_deviation(&ex),
        swapped.1.max_deviation(&ey),
        swapped.2.max_deviation(&ez),
        r1,
        r2,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(BchReport {
        direct,
        swapped,
        expected: (ex, ey, ez),
        max_deviation,
        tol,
        pass: max_deviation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn so3_const() -> GaugePotential {
        GaugePotential::parse(MatrixLieAlgebra::so3(), 2, &[vec!["1", "0"], vec!["0", "1"], vec!["0", "0"]]).unwrap()
    }

    fn so2_abelian() -> GaugePotential {
        GaugePotential::parse(MatrixLieAlgebra::so2(), 2, &[vec!["0", "x1"]]).unwrap()
    }

    fn rot(a: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
    }

    #[test]
    fn potential_rejects_fiber_variables() {
        assert!(GaugePotential::parse(MatrixLieAlgebra::so2(), 1, &[vec!["f1"]]).is_err());
        assert!(GaugePotential::parse(MatrixLieAlgebra::so2(), 2, &[vec!["x1"]]).is_err());
    }

    #[test]
    fn omega_examples() {
        let p = so3_const();
        let alg = &p.algebra;
        let v = AlgebraElement::new(vec![0.1, 0.2, 0.3]);
        let t = PrincipalTangent {
            x: vec![0.0, 0.0],
            g: GroupElement::identity(3),
            xi: vec![2.0, -1.0],
            v: v.clone(),
        };
        assert_eq!(omega_eval(&p, &t).unwrap().coeffs, vec![2.1, -0.8, 0.3]);

        let g = alg.exp(&AlgebraElement::new(vec![0.4, -0.3, 1.0])).unwrap();
        let vertical = PrincipalTangent { g, xi: vec![0.0, 0.0], ..t };
        assert_eq!(omega_eval(&p, &vertical).unwrap(), v);

        let ab = so2_abelian();
        let t = PrincipalTangent {
            x: vec![3.0, 0.0],
            g: GroupElement::new(rot(1.2)).unwrap(),
            xi: vec![0.0, 1.0],
            v: AlgebraElement::new(vec![0.5]),
        };
        assert!((omega_eval(&ab, &t).unwrap().coeffs[0] - 3.5).abs() < 1e-14);
    }

    #[test]
    fn vtriv_examples() {
        let so2 = MatrixLieAlgebra::so2();
        let g0 = GroupElement::new(rot(0.7)).unwrap();
        assert_eq!(vtriv_principal(&so2, &g0, &DMatrix::zeros(2, 2)).unwrap(), so2.zero());
        // d/dt rot(α + t) at t = 0
        let w = DMatrix::from_row_slice(2, 2, &[-(0.7f64.sin()), -(0.7f64.cos()), 0.7f64.cos(), -(0.7f64.sin())]);
        let v = vtriv_principal(&so2, &g0, &w).unwrap();
        assert!((v.coeffs[0] - 1.0).abs() < 1e-15);
        // symmetric velocity is not tangent to SO(2)
        assert!(matches!(
            vtriv_principal(&so2, &g0, &DMatrix::identity(2, 2)),
            Err(Error::NotVertical { .. })
        ));
    }

    #[test]
    fn cartan_examples() {
        let zero = GaugePotential::zero(MatrixLieAlgebra::so3(), 2);
        assert!(cartan_curvature(&zero, &[0.3, 0.1]).unwrap().data.iter().all(|&c| c == 0.0));
        let f = cartan_curvature(&so2_abelian(), &[0.3, 0.1]).unwrap();
        assert_eq!(f.get(0, 1).coeffs, vec![1.0]);
        assert_eq!(f.get(1, 0).coeffs, vec![-1.0]);
        let f = cartan_curvature(&so3_const(), &[0.3, 0.1]).unwrap();
        assert_eq!(f.get(0, 1).coeffs, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn axiom_holds_and_negative_control_fails() {
        let p = so3_const();
        let mut rng = SampleRng::new(11);
        let r = check_axiom(&p, 5, 1e-8, &mut rng).unwrap();
        assert!(r.pass, "{r:?}");
        let zero = GaugePotential::zero(MatrixLieAlgebra::so3(), 2);
        assert!(check_axiom(&zero, 5, 1e-8, &mut rng).unwrap().pass);

        let no_ad = |t: &PrincipalTangent| -> Result<AlgebraElement> { Ok(&p.contract(&t.x, &t.xi)? + &t.v) };
        let r = check_axiom_with(&p, &no_ad, 5, 1e-8, &mut rng).unwrap();
        assert!(!r.pass && r.max_residual > 1e-3);
    }

    #[test]
    fn chart_vtriv_at_origin_is_identity() {
        let so3 = MatrixLieAlgebra::so3();
        let chart = ExpChart::new(so3.clone(), GroupElement::identity(3)).unwrap();
        let v = chart.vtriv(&[0.0, 0.0, 0.0], &[1.0, -2.0, 0.5]).unwrap();
        assert!(v.max_deviation(&AlgebraElement::new(vec![1.0, -2.0, 0.5])) < 1e-14);
    }

    #[test]
    fn cross_check_examples() {
        let x = [0.2, -0.4];
        let zero = GaugePotential::zero(MatrixLieAlgebra::so3(), 2);
        let chart = ExpChart::new(zero.algebra.clone(), GroupElement::identity(3)).unwrap();
        let s: Vec<Expr> = ["0.1*x1", "0.05", "-0.1*x2*x1"]
            .iter()
            .map(|t| parse(t, Dims::new(2, 3)).unwrap())
            .collect();
        let r = curvature_cross_check(&zero, &chart, &s, &x, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");

        let ab = so2_abelian();
        let chart = ExpChart::new(ab.algebra.clone(), GroupElement::new(rot(0.3)).unwrap()).unwrap();
        let s = vec![parse("0.2*x2", Dims::new(2, 1)).unwrap()];
        let r = curvature_cross_check(&ab, &chart, &s, &x, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.entries[0].cartan.coeffs[0] - 1.0).abs() < 1e-12);

        let p = so3_const();
        let g0 = p.algebra.exp(&AlgebraElement::new(vec![0.3, -0.6, 0.2])).unwrap();
        let chart = ExpChart::new(p.algebra.clone(), g0).unwrap();
        let s: Vec<Expr> = ["0.1*x1", "0.05 - 0.1*x2", "0.2*x1*x2"]
            .iter()
            .map(|t| parse(t, Dims::new(2, 3)).unwrap())
            .collect();
        let r = curvature_cross_check(&p, &chart, &s, &x, 1e-6).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn theta_bch_examples() {
        let so3 = MatrixLieAlgebra::so3();
        let id = GroupElement::identity(3);
        let e = |a| so3.basis_element(a);
        let (_, a, b, c) = theta_bch(&so3, &id, &e(0), &e(0), &e(1)).unwrap();
        assert_eq!((a, b, c), (e(0), e(0), e(1)));
        let (_, a, b, c) = theta_bch(&so3, &id, &e(0), &e(1), &so3.zero()).unwrap();
        assert_eq!((a, b, c), (e(1), e(0), e(2)));
        let so2 = MatrixLieAlgebra::so2();
        let (x, y, z) = (AlgebraElement::new(vec![0.3]), AlgebraElement::new(vec![-0.2]), AlgebraElement::new(vec![0.9]));
        let (_, a, b, c) = theta_bch(&so2, &GroupElement::identity(2), &x, &y, &z).unwrap();
        assert_eq!((a, b, c), (y, x, z));
    }

    #[test]
    fn theta_bch_verify_examples() {
        let so3 = MatrixLieAlgebra::so3();
        let id = GroupElement::identity(3);
        let r = theta_bch_verify(&so3, &id, &so3.basis_element(0), &so3.basis_element(1), &so3.zero(), 1e-4).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.swapped.2.max_deviation(&so3.basis_element(2)) < 1e-4);

        let z = so3.zero();
        let r = theta_bch_verify(&so3, &id, &z, &z, &z, 0.0).unwrap();
        assert_eq!(r.max_deviation, 0.0);

        let so2 = MatrixLieAlgebra::so2();
        let g = GroupElement::new(rot(0.5)).unwrap();
        let (x, y, zz) = (AlgebraElement::new(vec![0.3]), AlgebraElement::new(vec![-0.7]), AlgebraElement::new(vec![0.4]));
        assert!(theta_bch_verify(&so2, &g, &x, &y, &zz, 1e-6).unwrap().pass);
    }
}
