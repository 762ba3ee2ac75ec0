//! Second jets on the iterated vertical bundle, the canonical involution
//! `Θ`, the double projection `Π` and the connection induced on the
//! vertical bundle.
//!
//! A [`SecondJet`] at `(x, f)` carries the coordinates `(ḟ; f̊; f̊̇)`. The
//! curvature is recovered as the affine difference of two second covariant
//! derivatives after twisting one of them by `Θ`.

use crate::bundle::{
    max_abs, max_abs_diff, BundlePatch, ChristoffelField, Section, VerticalVector, ALGEBRAIC_TOL,
    DERIVATIVE_TOL,
};
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::numcore::{eval, eval_jet, mixed_second, partial, EvalPoint, Jet2, JetPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct SecondJet {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub fdot: Vec<f64>,
    pub fcirc: Vec<f64>,
    pub fcircdot: Vec<f64>,
}

impl SecondJet {
    /// Jet over a point with every higher slot zero.
    pub fn zero(x: Vec<f64>, f: Vec<f64>) -> Self {
        let n = f.len();
        SecondJet {
            x,
            f,
            fdot: vec![0.0; n],
            fcirc: vec![0.0; n],
            fcircdot: vec![0.0; n],
        }
    }

    pub fn base_point(&self) -> EvalPoint {
        EvalPoint::new(self.x.clone(), self.f.clone())
    }

    fn check(&self) -> Result<()> {
        let n = self.f.len();
        if self.fdot.len() != n || self.fcirc.len() != n || self.fcircdot.len() != n {
            return Err(Error::DimensionMismatch("second jet slots have different lengths".into()));
        }
        Ok(())
    }
}

/// Two vertical vectors over a shared point.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalPairBase {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl VerticalPairBase {
    pub fn swap(&self) -> Self {
        VerticalPairBase {
            x: self.x.clone(),
            f: self.f.clone(),
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

/// The involution: exchanges `ḟ` and `f̊`.
pub fn theta(j: &SecondJet) -> SecondJet {
    SecondJet {
        x: j.x.clone(),
        f: j.f.clone(),
        fdot: j.fcirc.clone(),
        fcirc: j.fdot.clone(),
        fcircdot: j.fcircdot.clone(),
    }
}

/// `Π(f; ḟ; f̊; f̊̇) = (f; f̊; ḟ)`.
pub fn pi(j: &SecondJet) -> VerticalPairBase {
    VerticalPairBase {
        x: j.x.clone(),
        f: j.f.clone(),
        first: j.fcirc.clone(),
        second: j.fdot.clone(),
    }
}

/// Difference of two jets in the same fiber of `Π`.
pub fn affine_diff(j1: &SecondJet, j2: &SecondJet) -> Result<VerticalVector> {
    j1.check()?;
    j2.check()?;
    if j1.x.len() != j2.x.len() || j1.f.len() != j2.f.len() {
        return Err(Error::DimensionMismatch("second jets over different patches".into()));
    }
    let deviation = [
        max_abs_diff(&j1.x, &j2.x),
        max_abs_diff(&j1.f, &j2.f),
        max_abs_diff(&j1.fdot, &j2.fdot),
        max_abs_diff(&j1.fcirc, &j2.fcirc),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if deviation > ALGEBRAIC_TOL {
        return Err(Error::FiberMismatch { deviation });
    }
    let w = j1.fcircdot.iter().zip(&j2.fcircdot).map(|(a, b)| a - b).collect();
    Ok(VerticalVector { at: j1.base_point(), w })
}

/// Transports a jet through the fiber chart change `f ↦ h(x, f)`.
///
/// The fiber coordinates are seeded with `f̊` on the first jet direction,
/// `ḟ` on the second and `f̊̇` on the mixed slot, so the chain rule for the
/// mixed slot comes out of a single jet evaluation.
pub fn pushforward_second_jet(h: &[Expr], j: &SecondJet) -> Result<SecondJet> {
    j.check()?;
    let jp = JetPoint {
        x: j.x.iter().map(|&v| Jet2::constant(v)).collect(),
        f: (0..j.f.len())
            .map(|a| Jet2::new(j.f[a], j.fcirc[a], j.fdot[a], j.fcircdot[a]))
            .collect(),
    };
    let out = h.iter().map(|e| eval_jet(e, &jp)).collect::<Result<Vec<_>>>()?;
    Ok(SecondJet {
        x: j.x.clone(),
        f: out.iter().map(|t| t.value).collect(),
        fdot: out.iter().map(|t| t.d2).collect(),
        fcirc: out.iter().map(|t| t.d1).collect(),
        fcircdot: out.iter().map(|t| t.d12).collect(),
    })
}

/// Induced connection on the vertical bundle, a connection on the patch
/// with fiber coordinates `(f¹..fⁿ, f̊¹..f̊ⁿ)`: the `f` block keeps `Γ`, the
/// `f̊` block is `Σ_β ∂Γ^α_μ/∂f^β · f̊^β`.
pub fn vertical_connection(g: &ChristoffelField) -> Result<ChristoffelField> {
    let (m, n) = (g.m(), g.n());
    let patch = BundlePatch::new(m, 2 * n)?;
    let mut gamma = g.gamma.clone();
    for row in &g.gamma {
        let lifted = row
            .iter()
            .map(|e| {
                Expr::sum((0..n).map(|beta| Expr::product(e.derivative(Var::F(beta)), Expr::f(n + beta))))
            })
            .collect();
        gamma.push(lifted);
    }
    ChristoffelField::new(patch, gamma)
}

fn check_indices(g: &ChristoffelField, s: &Section, idx: &[usize]) -> Result<()> {
    if s.patch.dims() != g.patch.dims() {
        return Err(Error::DimensionMismatch("section and connection patches differ".into()));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= g.m()) {
        return Err(Error::DimensionMismatch(format!(
            "base index {} out of range 1..{}",
            bad + 1,
            g.m()
        )));
    }
    Ok(())
}

/// `D^{Vert}_μ D_ν s` at `x` from the explicit coordinate formula, cross
/// checked against the induced connection applied to the varied section
/// `(s, D_ν s)`.
pub fn second_covariant(g: &ChristoffelField, s: &Section, mu: usize, nu: usize, x: &[f64]) -> Result<SecondJet> {
    check_indices(g, s, &[mu, nu])?;
    let n = g.n();
    let p = s.point(x)?;
    let base = EvalPoint::new(x.to_vec(), vec![]);
    let fdot = g.covariant_derivative(s, nu, x)?.w;
    let fcirc = g.covariant_derivative(s, mu, x)?.w;

    let ds = |beta: usize, i: usize| partial(&s.comps[beta], &base, Var::X(i));
    let dgf = |alpha: usize, i: usize, beta: usize| partial(&g.gamma[alpha][i], &p, Var::F(beta));
    let mut mixed = Vec::with_capacity(n);
    for alpha in 0..n {
        let mut v = mixed_second(&s.comps[alpha], &base, Var::X(mu), Var::X(nu))?
            + partial(&g.gamma[alpha][nu], &p, Var::X(mu))?;
        for beta in 0..n {
            v += dgf(alpha, mu, beta)? * eval(&g.gamma[beta][nu], &p)?;
        }
        for beta in 0..n {
            v += dgf(alpha, nu, beta)? * ds(beta, mu)?;
        }
        for beta in 0..n {
            v += dgf(alpha, mu, beta)? * ds(beta, nu)?;
        }
        mixed.push(v);
    }

    let vert = vertical_connection(g)?;
    let varied = varied_section(g, s, nu)?;
    let other = vert.covariant_derivative(&varied, mu, x)?.w;
    let (via_fcirc, via_mixed) = other.split_at(n);
    let scale = 1.0f64.max(max_abs(&mixed)).max(max_abs(&fcirc));
    let deviation = max_abs_diff(&mixed, via_mixed).max(max_abs_diff(&fcirc, via_fcirc));
    if deviation > DERIVATIVE_TOL * scale {
        return Err(Error::InternalDisagreement {
            what: "second covariant derivative (coordinate formula vs induced connection)",
            deviation,
        });
    }

    Ok(SecondJet {
        x: x.to_vec(),
        f: p.f,
        fdot,
        fcirc,
        fcircdot: mixed,
    })
}

/// The section `(s, D_ν s)` of the vertical bundle, as expressions.
pub fn varied_section(g: &ChristoffelField, s: &Section, nu: usize) -> Result<Section> {
    check_indices(g, s, &[nu])?;
    let n = g.n();
    let on_section = |v: Var| match v {
        Var::F(beta) => s.comps.get(beta).cloned(),
        Var::X(_) => None,
    };
    let mut comps = s.comps.clone();
    for alpha in 0..n {
        comps.push(Expr::sum([
            s.comps[alpha].derivative(Var::X(nu)),
            g.gamma[alpha][nu].substitute(&on_section),
        ]));
    }
    Section::new(BundlePatch::new(g.m(), 2 * n)?, comps)
}

/// `D^{Vert}_μ D_ν s − Θ(D^{Vert}_ν D_μ s)` at `x`; equals the curvature
/// coefficients `R^·_{μν}(x, s(x))`.
pub fn commutator_curvature(g: &ChristoffelField, s: &Section, mu: usize, nu: usize, x: &[f64]) -> Result<VerticalVector> {
    let a = second_covariant(g, s, mu, nu, x)?;
    let b = second_covariant(g, s, nu, mu, x)?;
    affine_diff(&a, &theta(&b))
}
