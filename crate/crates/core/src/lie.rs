//! Matrix Lie algebras and groups.
//!
//! An algebra is a list of linearly independent `d×d` basis matrices closed
//! under the commutator. Elements are coefficient vectors in that basis;
//! matrices are re-expanded by least squares against the Gram matrix with an
//! explicit residual check, so bases need not be orthonormal.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative residual allowed when re-expanding a matrix in the basis.
pub const CLOSURE_TOL: f64 = 1e-10;
/// Smallest admissible `|det g|` for group elements.
pub const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub coeffs: Vec<f64>,
}

impl AlgebraElement {
    pub fn new(coeffs: Vec<f64>) -> Self {
        AlgebraElement { coeffs }
    }

    pub fn zero(k: usize) -> Self {
        AlgebraElement { coeffs: vec![0.0; k] }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_deviation(&self, other: &AlgebraElement) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn zip(&self, other: &AlgebraElement, op: impl Fn(f64, f64) -> f64) -> AlgebraElement {
        AlgebraElement::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| op(*a, *b)).collect())
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, r: &AlgebraElement) -> AlgebraElement {
        self.zip(r, |a, b| a + b)
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, r: &AlgebraElement) -> AlgebraElement {
        self.zip(r, |a, b| a - b)
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, r: f64) -> AlgebraElement {
        AlgebraElement::new(self.coeffs.iter().map(|a| a * r).collect())
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self * -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub g: DMatrix<f64>,
}

impl GroupElement {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() || g.nrows() == 0 {
            return Err(Error::DimensionMismatch("group element must be a non-empty square matrix".into()));
        }
        if g.determinant().abs() <= SINGULAR_TOL {
            return Err(Error::SingularMatrix);
        }
        Ok(GroupElement { g })
    }

    pub fn identity(d: usize) -> Self {
        GroupElement { g: DMatrix::identity(d, d) }
    }

    pub fn d(&self) -> usize {
        self.g.nrows()
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        self.g
            .clone()
            .try_inverse()
            .map(|g| GroupElement { g })
            .ok_or(Error::SingularMatrix)
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement { g: &self.g * &other.g }
    }
}

/// `g⁻¹h`.
pub fn fiber_quotient(g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    if g.d() != h.d() {
        return Err(Error::DimensionMismatch("group elements of different size".into()));
    }
    let lu = g.g.clone().lu();
    lu.solve(&h.g).map(|q| GroupElement { g: q }).ok_or(Error::SingularMatrix)
}

/// Matrix exponential by scaling and squaring of a Taylor polynomial.
///
/// The argument is scaled until its 1-norm is at most 1/2; the series is
/// then truncated at degree 20, far below double precision round-off.
pub fn expm(x: &DMatrix<f64>) -> DMatrix<f64> {
    let d = x.nrows();
    let norm1 = (0..x.ncols())
        .map(|j| x.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm1 * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let y = x * scale;
    let mut term = DMatrix::identity(d, d);
    let mut sum = term.clone();
    for j in 1..=20 {
        term = &term * &y / j as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Matrix commutator `XY − YX`.
pub fn commutator(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y - y * x
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixLieAlgebra {
    pub name: String,
    pub d: usize,
    pub k: usize,
    pub basis: Vec<DMatrix<f64>>,
    /// `c^c_{ab}` stored at `[(a*k + b)*k + c]`.
    pub structure: Vec<f64>,
    gram_inv: DMatrix<f64>,
}

fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

impl MatrixLieAlgebra {
    /// Validates `basis` and derives the structure constants.
    pub fn new(name: impl Into<String>, basis: Vec<DMatrix<f64>>) -> Result<Self> {
        let name = name.into();
        let k = basis.len();
        if k == 0 {
            return Err(Error::InvalidAlgebra(format!("{name}: empty basis")));
        }
        let d = basis[0].nrows();
        if d == 0 || basis.iter().any(|e| e.nrows() != d || e.ncols() != d) {
            return Err(Error::InvalidAlgebra(format!(
                "{name}: basis matrices must all be square of the same size"
            )));
        }
        let gram = DMatrix::from_fn(k, k, |a, b| frobenius(&basis[a], &basis[b]));
        let eig = gram.clone().symmetric_eigen();
        let (lo, hi) = eig
            .eigenvalues
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !(lo > 1e-12 * hi.max(1.0)) {
            return Err(Error::InvalidAlgebra(format!("{name}: basis matrices are linearly dependent")));
        }
        let gram_inv = gram.try_inverse().ok_or(Error::SingularMatrix)?;
        let mut alg = MatrixLieAlgebra {
            name,
            d,
            k,
            basis,
            structure: vec![0.0; k * k * k],
            gram_inv,
        };
        for a in 0..k {
            for b in 0..k {
                let c = alg.coefficients(&commutator(&alg.basis[a], &alg.basis[b]))?;
                alg.structure[(a * k + b) * k..(a * k + b + 1) * k].copy_from_slice(&c.coeffs);
            }
        }
        let defect = alg.structure_defect();
        if defect > CLOSURE_TOL {
            return Err(Error::InvalidAlgebra(format!(
                "{}: structure constants violate antisymmetry or Jacobi by {defect:e}",
                alg.name
            )));
        }
        Ok(alg)
    }

    pub fn so2() -> Self {
        let e = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        MatrixLieAlgebra::new("so2", vec![e]).expect("so(2) basis is valid")
    }

    /// Basis with `[E1, E2] = E3` and cyclic.
    pub fn so3() -> Self {
        let e1 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
        let e2 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        let e3 = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        MatrixLieAlgebra::new("so3", vec![e1, e2, e3]).expect("so(3) basis is valid")
    }

    /// Basis `H, E, F` with `[H,E] = 2E`, `[H,F] = −2F`, `[E,F] = H`.
    pub fn sl2() -> Self {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let e = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let f = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        MatrixLieAlgebra::new("sl2", vec![h, e, f]).expect("sl(2) basis is valid")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "so2" => Some(Self::so2()),
            "so3" => Some(Self::so3()),
            "sl2" => Some(Self::sl2()),
            _ => None,
        }
    }

    pub fn structure_constant(&self, a: usize, b: usize, c: usize) -> f64 {
        self.structure[(a * self.k + b) * self.k + c]
    }

    /// Largest violation of antisymmetry or the Jacobi identity.
    pub fn structure_defect(&self) -> f64 {
        let k = self.k;
        let c = |a, b, e| self.structure_constant(a, b, e);
        let mut worst = 0.0f64;
        for a in 0..k {
            for b in 0..k {
                for e in 0..k {
                    worst = worst.max((c(a, b, e) + c(b, a, e)).abs());
                    for out in 0..k {
                        // [[Ea,Eb],Ee] + cyclic
                        let j: f64 = (0..k)
                            .map(|l| c(a, b, l) * c(l, e, out) + c(b, e, l) * c(l, a, out) + c(e, a, l) * c(l, b, out))
                            .sum();
                        worst = worst.max(j.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn is_abelian(&self) -> bool {
        self.structure.iter().all(|&c| c == 0.0)
    }

    pub fn basis_element(&self, a: usize) -> AlgebraElement {
        let mut c = vec![0.0; self.k];
        c[a] = 1.0;
        AlgebraElement::new(c)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::zero(self.k)
    }

    pub fn matrix(&self, x: &AlgebraElement) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.d, self.d);
        for (c, e) in x.coeffs.iter().zip(&self.basis) {
            out += e * *c;
        }
        out
    }

    /// Least-squares coefficients of `m` and the Frobenius residual.
    pub fn fit(&self, m: &DMatrix<f64>) -> Result<(AlgebraElement, f64)> {
        if m.nrows() != self.d || m.ncols() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}×{0} matrix, got {1}×{2}",
                self.d,
                m.nrows(),
                m.ncols()
            )));
        }
        let rhs = DVector::from_iterator(self.k, self.basis.iter().map(|e| frobenius(e, m)));
        let c = &self.gram_inv * rhs;
        let x = AlgebraElement::new(c.iter().copied().collect());
        let residual = (m - self.matrix(&x)).norm();
        Ok((x, residual))
    }

    /// Coefficients of `m`, which must lie in the span of the basis.
    pub fn coefficients(&self, m: &DMatrix<f64>) -> Result<AlgebraElement> {
        let (x, residual) = self.fit(m)?;
        if residual > CLOSURE_TOL * m.norm().max(1.0) {
            return Err(Error::ClosureViolation { residual });
        }
        Ok(x)
    }

    fn check(&self, x: &AlgebraElement) -> Result<()> {
        if x.dim() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "{} has dimension {}, element has {} coefficients",
                self.name,
                self.k,
                x.dim()
            )));
        }
        Ok(())
    }

    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(x)?;
        self.check(y)?;
        self.coefficients(&commutator(&self.matrix(x), &self.matrix(y)))
    }

    pub fn exp(&self, x: &AlgebraElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(GroupElement { g: expm(&self.matrix(x)) })
    }

    /// `Ad_g X = g X g⁻¹`.
    pub fn adjoint(&self, g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(x)?;
        if g.d() != self.d {
            return Err(Error::DimensionMismatch("group element size does not match the algebra".into()));
        }
        let gi = g.inverse()?;
        self.coefficients(&(&g.g * self.matrix(x) * &gi.g))
    }
}

/// Matrix-valued jet `v + d1·t + d2·ε + d12·tε`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatJet {
    pub v: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    pub d12: DMatrix<f64>,
}

impl MatJet {
    pub fn constant(v: DMatrix<f64>) -> Self {
        let z = DMatrix::zeros(v.nrows(), v.ncols());
        MatJet { d1: z.clone(), d2: z.clone(), d12: z, v }
    }

    pub fn mul(&self, r: &MatJet) -> MatJet {
        MatJet {
            v: &self.v * &r.v,
            d1: &self.d1 * &r.v + &self.v * &r.d1,
            d2: &self.d2 * &r.v + &self.v * &r.d2,
            d12: &self.d12 * &r.v + (&self.d1 * &r.d2 + &self.d2 * &r.d1) + &self.v * &r.d12,
        }
    }

    pub fn add(&self, r: &MatJet) -> MatJet {
        MatJet {
            v: &self.v + &r.v,
            d1: &self.d1 + &r.d1,
            d2: &self.d2 + &r.d2,
            d12: &self.d12 + &r.d12,
        }
    }

    pub fn inverse(&self) -> Result<MatJet> {
        let w = self.v.clone().try_inverse().ok_or(Error::SingularMatrix)?;
        let w1 = -(&w * &self.d1 * &w);
        let w2 = -(&w * &self.d2 * &w);
        let w12 = -(&w * (&self.d12 * &w + &self.d1 * &w2 + &self.d2 * &w1));
        Ok(MatJet { v: w, d1: w1, d2: w2, d12: w12 })
    }

    /// Exponential, read off the block lower-triangular representation of
    /// the jet algebra.
    pub fn exp(&self) -> MatJet {
        let d = self.v.nrows();
        let mut big = DMatrix::zeros(4 * d, 4 * d);
        let mut put = |bi: usize, bj: usize, m: &DMatrix<f64>| {
            big.view_mut((bi * d, bj * d), (d, d)).copy_from(m);
        };
        for b in 0..4 {
            put(b, b, &self.v);
        }
        put(1, 0, &self.d1);
        put(2, 0, &self.d2);
        put(3, 0, &self.d12);
        put(3, 1, &self.d2);
        put(3, 2, &self.d1);
        let e = expm(&big);
        let block = |bi: usize| e.view((bi * d, 0), (d, d)).into_owned();
        MatJet {
            v: block(0),
            d1: block(1),
            d2: block(2),
            d12: block(3),
        }
    }
}
