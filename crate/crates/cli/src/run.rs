//! Check execution.
//!
//! Each check draws from its own stream `SampleRng::for_check(seed, name)`,
//! so the report does not depend on scheduling. Library errors inside a
//! check become a failed verdict for that check only.

use std::time::Instant;

use conncurv::bundle::{is_parallel_morphism, BundlePatch, ChristoffelField, Section};
use conncurv::expr::{Expr, Var};
use conncurv::lie::{AlgebraElement, GroupElement, MatrixLieAlgebra};
use conncurv::linear::{expand_linear, linear_curvature_consistency, linearity_detect, LinearChristoffel, Linearity};
use conncurv::principal::{
    check_axiom, check_axiom_with, curvature_cross_check, theta_bch_verify, ExpChart, GaugePotential, PrincipalTangent,
};
use conncurv::prolong::{commutator_curvature, pi, pushforward_second_jet, theta, SecondJet};
use conncurv::sampling::{random_christoffel, random_linear_christoffel, random_polynomial, random_polynomial_scaled, random_section, SampleRng};
use conncurv::EvalPoint;
use rayon::prelude::*;

use crate::config::{CheckSpec, Expect, Family, SuiteConfig, Target};
use crate::report::{CheckResult, RunReport, Verdict};

/// Half-width of the cube base and fiber coordinates are drawn from.
pub const SAMPLE_RADIUS: f64 = 1.0;
/// Coefficient bound of the random sections used by cartan-cross-check;
/// keeps `|S(x)|` inside the exponential chart.
pub const CARTAN_SECTION_AMPLITUDE: f64 = 0.08;

/// What a check measured before its verdict is decided.
#[derive(Debug, Clone, PartialEq)]
struct Measured {
    residual: f64,
    detail: Option<String>,
}

impl Measured {
    fn plain(residual: f64) -> Self {
        Measured { residual, detail: None }
    }
}

/// `|a - b|` over a slice pair, relative to `max(1, |b|)`.
fn rel_dev(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |d, (x, y)| d.max((x - y).abs())) / scale
}

fn random_dims(rng: &mut SampleRng) -> (usize, usize) {
    (1 + rng.below(3), 1 + rng.below(3))
}

fn random_patch(rng: &mut SampleRng) -> conncurv::Result<BundlePatch> {
    let (m, n) = random_dims(rng);
    BundlePatch::new(m, n)
}

fn points(rng: &mut SampleRng, m: usize, n: usize, count: usize) -> Vec<EvalPoint> {
    (0..count).map(|_| rng.point(m, n, SAMPLE_RADIUS)).collect()
}

fn random_group(rng: &mut SampleRng, alg: &MatrixLieAlgebra) -> conncurv::Result<GroupElement> {
    alg.exp(&AlgebraElement::new(rng.vector(alg.k, -1.0, 1.0)))
}

/// Instantiates a connection family: the named one, or `count` random ones.
fn christoffel_family(rng: &mut SampleRng, f: &Family<ChristoffelField>) -> conncurv::Result<Vec<ChristoffelField>> {
    match f {
        Family::Named(g) => Ok(vec![g.clone()]),
        Family::Random(count) => (0..*count)
            .map(|_| {
                let patch = random_patch(rng)?;
                Ok(random_christoffel(rng, &patch))
            })
            .collect(),
    }
}

fn curvature_coefficients(
    rng: &mut SampleRng,
    g: &ChristoffelField,
    expected: &[(usize, usize, usize, f64)],
    expect_flat: bool,
    samples: usize,
) -> conncurv::Result<Measured> {
    let mut worst = 0.0f64;
    for p in points(rng, g.m(), g.n(), samples) {
        let r = g.curvature_coefficients(&p)?;
        worst = worst.max(r.antisymmetry_defect());
        for &(a, mu, nu, value) in expected {
            worst = worst.max((r.get(a, mu, nu) - value).abs() / value.abs().max(1.0));
        }
        if expect_flat {
            worst = worst.max(r.data.iter().fold(0.0f64, |s, v| s.max(v.abs())));
        }
    }
    Ok(Measured::plain(worst))
}

fn nijenhuis_vs_coefficients(rng: &mut SampleRng, family: &Family<ChristoffelField>, samples: usize) -> conncurv::Result<Measured> {
    let mut worst = 0.0f64;
    for g in christoffel_family(rng, family)? {
        for p in points(rng, g.m(), g.n(), samples) {
            let r = g.curvature_coefficients(&p)?;
            for mu in 0..g.m() {
                for nu in 0..g.m() {
                    let w = g.nijenhuis_coordinate(mu, nu, &p)?.w;
                    worst = worst.max(rel_dev(&w, &r.column(mu, nu)));
                }
            }
        }
    }
    Ok(Measured::plain(worst))
}

fn commutator_identity(
    rng: &mut SampleRng,
    family: &Family<ChristoffelField>,
    section: Option<&Section>,
    samples: usize,
) -> conncurv::Result<Measured> {
    let mut worst = 0.0f64;
    for g in christoffel_family(rng, family)? {
        for _ in 0..samples {
            let s = match section {
                Some(s) => s.clone(),
                None => random_section(rng, &g.patch),
            };
            let x = rng.vector(g.m(), -SAMPLE_RADIUS, SAMPLE_RADIUS);
            let r = g.curvature_coefficients(&s.point(&x)?)?;
            for mu in 0..g.m() {
                for nu in 0..g.m() {
                    let c = commutator_curvature(&g, &s, mu, nu, &x)?;
                    worst = worst.max(rel_dev(&c.w, &r.column(mu, nu)));
                }
            }
        }
    }
    Ok(Measured::plain(worst))
}

fn jet_slots(j: &SecondJet) -> Vec<f64> {
    [&j.x, &j.f, &j.fdot, &j.fcirc, &j.fcircdot].into_iter().flatten().copied().collect()
}

fn theta_equivariance(rng: &mut SampleRng, family: &Family<(usize, Vec<Expr>)>, samples: usize) -> conncurv::Result<Measured> {
    let transitions: Vec<(usize, Vec<Expr>)> = match family {
        Family::Named(h) => vec![h.clone()],
        Family::Random(count) => (0..*count)
            .map(|_| {
                let (m, n) = random_dims(rng);
                let vars: Vec<Var> = (0..m).map(Var::X).chain((0..n).map(Var::F)).collect();
                (m, (0..n).map(|_| random_polynomial(rng, &vars, 3, 3)).collect())
            })
            .collect(),
    };
    let mut worst = 0.0f64;
    for (m, h) in &transitions {
        let n = h.len();
        for _ in 0..samples {
            let x = rng.vector(*m, -SAMPLE_RADIUS, SAMPLE_RADIUS);
            let mut v = || rng.vector(n, -SAMPLE_RADIUS, SAMPLE_RADIUS);
            let j = SecondJet {
                x,
                f: v(),
                fdot: v(),
                fcirc: v(),
                fcircdot: v(),
            };
            // Θ is an involution and intertwines Π with the swap
            worst = worst.max(rel_dev(&jet_slots(&theta(&theta(&j))), &jet_slots(&j)));
            let (a, b) = (pi(&theta(&j)), pi(&j).swap());
            worst = worst.max(rel_dev(&[a.first, a.second].concat(), &[b.first, b.second].concat()));
            // chart changes commute with Θ
            let lhs = pushforward_second_jet(h, &theta(&j))?;
            let rhs = theta(&pushforward_second_jet(h, &j)?);
            worst = worst.max(rel_dev(&jet_slots(&lhs), &jet_slots(&rhs)));
        }
    }
    Ok(Measured::plain(worst))
}

fn connection_axiom(rng: &mut SampleRng, p: &GaugePotential, drop_adjoint: bool, samples: usize, tol: f64) -> conncurv::Result<Measured> {
    let report = if drop_adjoint {
        let without_ad = |t: &PrincipalTangent| Ok(&p.contract(&t.x, &t.xi)? + &t.v);
        check_axiom_with(p, &without_ad, samples, tol, rng)?
    } else {
        check_axiom(p, samples, tol, rng)?
    };
    Ok(Measured::plain(report.max_residual))
}

fn cartan_cross_check(rng: &mut SampleRng, p: &GaugePotential, samples: usize, tol: f64) -> conncurv::Result<Measured> {
    let alg = &p.algebra;
    let vars: Vec<Var> = (0..p.m).map(Var::X).collect();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let chart = ExpChart::new(alg.clone(), random_group(rng, alg)?)?;
        let section: Vec<Expr> = (0..alg.k)
            .map(|_| random_polynomial_scaled(rng, &vars, 2, 3, CARTAN_SECTION_AMPLITUDE))
            .collect();
        let x = rng.vector(p.m, -SAMPLE_RADIUS, SAMPLE_RADIUS);
        worst = worst.max(curvature_cross_check(p, &chart, &section, &x, tol)?.max_deviation);
    }
    Ok(Measured::plain(worst))
}

fn bch_theta(
    rng: &mut SampleRng,
    alg: &MatrixLieAlgebra,
    xyz: Option<&[AlgebraElement; 3]>,
    samples: usize,
    tol: f64,
) -> conncurv::Result<Measured> {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let g = random_group(rng, alg)?;
        let [x, y, z] = match xyz {
            Some(v) => v.clone(),
            None => [(); 3].map(|_| AlgebraElement::new(rng.vector(alg.k, -1.0, 1.0))),
        };
        worst = worst.max(theta_bch_verify(alg, &g, &x, &y, &z, tol)?.max_deviation);
    }
    Ok(Measured::plain(worst))
}

fn linearity(rng: &mut SampleRng, g: &ChristoffelField, lambdas: &[f64], samples: usize, tol: f64) -> conncurv::Result<Measured> {
    let pts = points(rng, g.m(), g.n(), samples);
    match linearity_detect(g, &pts, lambdas, tol)? {
        Linearity::Linear(l) => {
            // how well the extracted coefficients reproduce the field
            let expanded = expand_linear(&l);
            let mut worst = 0.0f64;
            for p in &pts {
                let a = expanded.eval_at(p)?.concat();
                let b = g.eval_at(p)?.concat();
                worst = worst.max(rel_dev(&a, &b));
            }
            Ok(Measured::plain(worst))
        }
        Linearity::NotLinear(v) => {
            let lambda = v.lambda.map_or("extraction".to_string(), |l| format!("lambda = {l}"));
            Ok(Measured {
                residual: (v.expected - v.actual).abs() / v.expected.abs().max(1.0),
                detail: Some(format!(
                    "not linear in the fiber at x = {:?}, v = {:?} ({lambda}): component ({}, {}) expected {}, got {}",
                    v.x,
                    v.v,
                    v.alpha + 1,
                    v.mu + 1,
                    v.expected + 0.0,
                    v.actual + 0.0
                )),
            })
        }
    }
}

fn linear_consistency(rng: &mut SampleRng, family: &Family<LinearChristoffel>, samples: usize, tol: f64) -> conncurv::Result<Measured> {
    let family: Vec<LinearChristoffel> = match family {
        Family::Named(l) => vec![l.clone()],
        Family::Random(count) => (0..*count)
            .map(|_| {
                let patch = random_patch(rng)?;
                Ok(random_linear_christoffel(rng, &patch))
            })
            .collect::<conncurv::Result<_>>()?,
    };
    let mut worst = 0.0f64;
    for l in &family {
        for p in points(rng, l.patch.m, l.patch.n, samples) {
            let r = linear_curvature_consistency(l, &p.x, &p.f, tol)?;
            worst = worst.max(rel_dev(&r.general, &r.contracted));
        }
    }
    Ok(Measured::plain(worst))
}

fn measure(spec: &CheckSpec, rng: &mut SampleRng) -> conncurv::Result<Measured> {
    let (n, tol) = (spec.samples, spec.tolerance);
    match &spec.target {
        Target::CurvatureCoefficients {
            connection,
            expected,
            expect_flat,
        } => curvature_coefficients(rng, connection, expected, *expect_flat, n),
        Target::NijenhuisVsCoefficients(f) => nijenhuis_vs_coefficients(rng, f, n),
        Target::CommutatorIdentity { family, section } => commutator_identity(rng, family, section.as_ref(), n),
        Target::ThetaEquivariance(f) => theta_equivariance(rng, f, n),
        Target::ParallelMorphism { morphism, source, target } => {
            let pts = points(rng, source.m(), source.n(), n);
            Ok(Measured::plain(is_parallel_morphism(morphism, source, target, &pts, tol)?.max_residual))
        }
        Target::ConnectionAxiom { potential, drop_adjoint } => connection_axiom(rng, potential, *drop_adjoint, n, tol),
        Target::CartanCrossCheck(p) => cartan_cross_check(rng, p, n, tol),
        Target::BchTheta { algebra, xyz } => bch_theta(rng, algebra, xyz.as_ref(), n, tol),
        Target::Linearity { connection, lambdas } => linearity(rng, connection, lambdas, n, tol),
        Target::LinearConsistency(f) => linear_consistency(rng, f, n, tol),
    }
}

/// Runs one check on its own stream.
pub fn run_check(spec: &CheckSpec, seed: u64) -> CheckResult {
    let mut rng = SampleRng::for_check(seed, &spec.name);
    let outcome = measure(spec, &mut rng);
    let (max_residual, detail, error) = match outcome {
        Ok(m) if m.residual.is_finite() => (Some(m.residual), m.detail, None),
        Ok(m) => (None, m.detail, Some(format!("non-finite residual {}", m.residual))),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let held = max_residual.map(|r| r <= spec.tolerance);
    let verdict = match (held, spec.expect) {
        (Some(true), Expect::Hold) | (Some(false), Expect::Violated) => Verdict::Pass,
        _ => Verdict::Fail,
    };
    CheckResult {
        name: spec.name.clone(),
        kind: spec.kind,
        expect: spec.expect,
        samples: spec.samples,
        max_residual,
        tolerance: spec.tolerance,
        verdict,
        detail,
        error,
    }
}

/// Runs every check, `jobs` at a time (0 picks the number of cores).
pub fn run(config: &SuiteConfig, jobs: usize) -> RunReport {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build();
    let exec = || -> Vec<CheckResult> { config.checks.par_iter().map(|c| run_check(c, config.seed)).collect() };
    let checks = match pool {
        Ok(pool) => pool.install(exec),
        // fall back to sequential execution if no pool can be built
        Err(_) => config.checks.iter().map(|c| run_check(c, config.seed)).collect(),
    };
    RunReport::new(config, checks, start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let text = include_str!("../fixtures/suite.json");
        let config = parse_config(text, "suite.json", 1.0).unwrap();
        let one = run(&config, 1);
        let many = run(&config, 4);
        assert_eq!(one.checks, many.checks);
        assert_eq!(one.verdict, Verdict::Pass);
    }

    #[test]
    fn library_errors_become_failed_checks() {
        let text = r#"{"version": 1,
            "bundles": {"b": {"m": 1, "n": 1}},
            "connections": {"g": {"bundle": "b", "gamma": [["log(x1 - 5)"]]}},
            "checks": [{"name": "bad", "kind": "curvature-coefficients", "connection": "g"}]}"#;
        let config = parse_config(text, "s", 1.0).unwrap();
        let r = run(&config, 1);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.checks[0].max_residual, None);
        assert!(r.checks[0].error.as_deref().unwrap().contains("domain"));
    }
}
