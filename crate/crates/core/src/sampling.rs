//! Seeded sample generation.
//!
//! Every stream is a PCG-32 generator; a named check gets its own stream
//! derived from the FNV-1a hash of the name, so results do not depend on the
//! order in which checks run.

use rand_core::Rng;
use rand_pcg::Pcg32;

use crate::bundle::{BundlePatch, ChristoffelField, Section};
use crate::expr::{BinaryOp, Dims, Expr, UnaryOp, Var};
use crate::linear::LinearChristoffel;
use crate::numcore::EvalPoint;

const DEFAULT_STREAM: u64 = 0x0a02_bdbf_7bb3_c0a7;

/// FNV-1a, 64 bit.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct SampleRng(Pcg32);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        SampleRng(Pcg32::new(seed, DEFAULT_STREAM))
    }

    /// Independent stream for the check called `name`.
    pub fn for_check(seed: u64, name: &str) -> Self {
        SampleRng(Pcg32::new(seed, fnv1a64(name.as_bytes())))
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    /// Uniform in `[0, 1)`: the top 53 bits of two consecutive outputs.
    pub fn next_f64(&mut self) -> f64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        ((hi << 32 | lo) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u32() as u64 * n as u64) >> 32) as usize
    }

    pub fn vector(&mut self, len: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(lo, hi)).collect()
    }

    pub fn point(&mut self, m: usize, n: usize, radius: f64) -> EvalPoint {
        let x = self.vector(m, -radius, radius);
        let f = self.vector(n, -radius, radius);
        EvalPoint::new(x, f)
    }
}

/// Random polynomial in `vars` with at most `terms` monomials of degree at
/// most `max_degree` and coefficients in `[-1, 1]`.
pub fn random_polynomial(rng: &mut SampleRng, vars: &[Var], max_degree: u32, terms: usize) -> Expr {
    random_polynomial_scaled(rng, vars, max_degree, terms, 1.0)
}

/// [`random_polynomial`] with coefficients in `[-amplitude, amplitude]`.
pub fn random_polynomial_scaled(rng: &mut SampleRng, vars: &[Var], max_degree: u32, terms: usize, amplitude: f64) -> Expr {
    let count = 1 + rng.below(terms.max(1));
    let monomials = (0..count).map(|_| {
        let coeff = Expr::constant(rng.uniform(-amplitude, amplitude));
        let degree = if vars.is_empty() { 0 } else { rng.below(max_degree as usize + 1) };
        let mut powers = vec![0i32; vars.len()];
        for _ in 0..degree {
            powers[rng.below(vars.len())] += 1;
        }
        vars.iter()
            .zip(&powers)
            .filter(|(_, &k)| k > 0)
            .fold(coeff, |acc, (v, &k)| {
                let factor = if k == 1 { Expr::Var(*v) } else { Expr::Var(*v).powi(k) };
                Expr::binary(BinaryOp::Mul, acc, factor)
            })
    });
    Expr::sum(monomials)
}

fn all_vars(m: usize, n: usize) -> Vec<Var> {
    (0..m).map(Var::X).chain((0..n).map(Var::F)).collect()
}

/// Christoffel symbols with random polynomial entries of degree ≤ 3.
pub fn random_christoffel(rng: &mut SampleRng, patch: &BundlePatch) -> ChristoffelField {
    let vars = all_vars(patch.m, patch.n);
    let gamma = (0..patch.n)
        .map(|_| (0..patch.m).map(|_| random_polynomial(rng, &vars, 3, 3)).collect())
        .collect();
    ChristoffelField {
        patch: patch.clone(),
        gamma,
    }
}

/// Section with random polynomial components of degree ≤ 3.
pub fn random_section(rng: &mut SampleRng, patch: &BundlePatch) -> Section {
    let vars: Vec<Var> = (0..patch.m).map(Var::X).collect();
    let comps = (0..patch.n).map(|_| random_polynomial(rng, &vars, 3, 3)).collect();
    Section {
        patch: patch.clone(),
        comps,
    }
}

/// Linear connection with random polynomial coefficients of degree ≤ 2.
pub fn random_linear_christoffel(rng: &mut SampleRng, patch: &BundlePatch) -> LinearChristoffel {
    let vars: Vec<Var> = (0..patch.m).map(Var::X).collect();
    let gamma3 = (0..patch.n)
        .map(|_| {
            (0..patch.m)
                .map(|_| (0..patch.n).map(|_| random_polynomial(rng, &vars, 2, 3)).collect())
                .collect()
        })
        .collect();
    LinearChristoffel {
        patch: patch.clone(),
        gamma3,
    }
}

/// Random expression tree over every node kind, for printer round trips.
pub fn random_expr(rng: &mut SampleRng, dims: Dims, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.below(4) == 0;
    if leaf {
        return match rng.below(4) {
            0 => Expr::Const((rng.uniform(0.0, 10.0) * 1000.0).round() / 1000.0),
            1 => Expr::Pi,
            2 => Expr::x(rng.below(dims.m)),
            _ => Expr::f(rng.below(dims.n)),
        };
    }
    let d = depth - 1;
    match rng.below(4) {
        0 => {
            let op = [
                UnaryOp::Neg,
                UnaryOp::Sin,
                UnaryOp::Cos,
                UnaryOp::Exp,
                UnaryOp::Log,
                UnaryOp::Sqrt,
            ][rng.below(6)];
            Expr::unary(op, random_expr(rng, dims, d))
        }
        1 => random_expr(rng, dims, d).powi(rng.below(7) as i32 - 3),
        _ => {
            let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][rng.below(4)];
            Expr::binary(op, random_expr(rng, dims, d), random_expr(rng, dims, d))
        }
    }
}
