//! Browser bindings for three interactive demos: a curvature heatmap over
//! the base of a line bundle on the plane, the commutator of second
//! covariant derivatives at a point, and the twisted swap in SO(3).
//!
//! Each export is a thin wrapper over a plain function returning
//! `Result<_, String>`, so the logic is testable natively.

use conncurv::bundle::{BundlePatch, ChristoffelField, Section};
use conncurv::lie::{AlgebraElement, MatrixLieAlgebra};
use conncurv::principal::theta_bch_verify;
use conncurv::prolong::{commutator_curvature, second_covariant, SecondJet};
use conncurv::EvalPoint;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn plane_connection(gamma1: &str, gamma2: &str) -> Result<ChristoffelField, String> {
    let patch = BundlePatch::new(2, 1).map_err(|e| e.to_string())?;
    ChristoffelField::parse(patch, &[vec![gamma1, gamma2]]).map_err(|e| e.to_string())
}

/// `R^1_{12}(x, f)` on a `size × size` grid over `[-extent, extent]²`,
/// row-major with `x2` increasing down the rows. Points where the
/// connection cannot be evaluated are NaN.
pub fn heatmap(gamma1: &str, gamma2: &str, fiber: f64, extent: f64, size: usize) -> Result<Vec<f64>, String> {
    let g = plane_connection(gamma1, gamma2)?;
    if size < 2 {
        return Err("grid needs at least 2 points per side".into());
    }
    let step = 2.0 * extent / (size - 1) as f64;
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        let x2 = extent - row as f64 * step;
        for col in 0..size {
            let x1 = -extent + col as f64 * step;
            let p = EvalPoint::new(vec![x1, x2], vec![fiber]);
            out.push(g.curvature_coefficients(&p).map_or(f64::NAN, |r| r.get(0, 0, 1)));
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct Jet {
    f: f64,
    fdot: f64,
    fcirc: f64,
    fcircdot: f64,
}

impl From<SecondJet> for Jet {
    fn from(j: SecondJet) -> Self {
        Jet {
            f: j.f[0],
            fdot: j.fdot[0],
            fcirc: j.fcirc[0],
            fcircdot: j.fcircdot[0],
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CommutatorView {
    d1d2: Jet,
    d2d1: Jet,
    commutator: f64,
    curvature: f64,
    deviation: f64,
}

/// Second covariant derivatives `D1 D2 s`, `D2 D1 s`, their twisted
/// difference and `R^1_{12}(x, s(x))`.
pub fn commutator(gamma1: &str, gamma2: &str, section: &str, x1: f64, x2: f64) -> Result<CommutatorView, String> {
    let g = plane_connection(gamma1, gamma2)?;
    let s = Section::parse(g.patch.clone(), &[section]).map_err(|e| e.to_string())?;
    let x = [x1, x2];
    let run = || -> conncurv::Result<CommutatorView> {
        let c = commutator_curvature(&g, &s, 0, 1, &x)?.w[0];
        let r = g.curvature_coefficients(&s.point(&x)?)?.get(0, 0, 1);
        Ok(CommutatorView {
            d1d2: second_covariant(&g, &s, 0, 1, &x)?.into(),
            d2d1: second_covariant(&g, &s, 1, 0, &x)?.into(),
            commutator: c,
            curvature: r,
            deviation: (c - r).abs(),
        })
    };
    run().map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct TwistView {
    direct: [Vec<f64>; 3],
    swapped: [Vec<f64>; 3],
    expected: [Vec<f64>; 3],
    deviation: f64,
}

fn triple(t: (AlgebraElement, AlgebraElement, AlgebraElement)) -> [Vec<f64>; 3] {
    [t.0.coeffs, t.1.coeffs, t.2.coeffs]
}

/// Reads the slots of `g·e^{tX}·e^{ε(Y+tZ)}` in so(3) by finite
/// differences, directly and with `t` and `ε` exchanged.
pub fn twist(g: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> Result<TwistView, String> {
    let so3 = MatrixLieAlgebra::so3();
    for v in [g, x, y, z] {
        if v.len() != 3 {
            return Err("so(3) elements have 3 coefficients".into());
        }
    }
    let el = |v: &[f64]| AlgebraElement::new(v.to_vec());
    let run = || -> conncurv::Result<TwistView> {
        let g = so3.exp(&el(g))?;
        let r = theta_bch_verify(&so3, &g, &el(x), &el(y), &el(z), 1e-4)?;
        Ok(TwistView {
            direct: triple(r.direct),
            swapped: triple(r.swapped),
            expected: triple(r.expected),
            deviation: r.max_deviation,
        })
    };
    run().map_err(|e| e.to_string())
}

fn to_js<T: Serialize>(v: &T) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = curvatureHeatmap)]
pub fn curvature_heatmap(gamma1: &str, gamma2: &str, fiber: f64, extent: f64, size: usize) -> Result<Vec<f64>, JsValue> {
    heatmap(gamma1, gamma2, fiber, extent, size).map_err(|e| JsValue::from_str(&e))
}

/// JSON-encoded [`CommutatorView`].
#[wasm_bindgen(js_name = commutatorCheck)]
pub fn commutator_check(gamma1: &str, gamma2: &str, section: &str, x1: f64, x2: f64) -> Result<String, JsValue> {
    to_js(&commutator(gamma1, gamma2, section, x1, x2).map_err(|e| JsValue::from_str(&e))?)
}

/// JSON-encoded [`TwistView`].
#[wasm_bindgen(js_name = bchTwist)]
pub fn bch_twist(g: Vec<f64>, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<String, JsValue> {
    to_js(&twist(&g, &x, &y, &z).map_err(|e| JsValue::from_str(&e))?)
}
