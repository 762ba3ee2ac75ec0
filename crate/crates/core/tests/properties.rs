use conncurv::bundle::{
    bracket_field, is_parallel_morphism, lie_bracket, BundlePatch, ChristoffelField, FiberBundleMorphism,
    TotalTangent, TotalVectorField,
};
use conncurv::expr::{parse, Dims, Expr, Var};
use conncurv::lie::{expm, AlgebraElement, MatrixLieAlgebra};
use conncurv::linear::{classical_curvature, expand_linear, reduced_covariant, LinearChristoffel};
use conncurv::numcore::{eval, partial, EvalPoint};
use conncurv::principal::{omega_eval, vtriv_principal, GaugePotential, PrincipalTangent};
use conncurv::prolong::{commutator_curvature, pi, pushforward_second_jet, theta, vertical_connection, SecondJet};
use conncurv::sampling::{random_christoffel, random_expr, random_polynomial, random_section, SampleRng};
use conncurv::bundle::Section;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn random_patch(rng: &mut SampleRng) -> BundlePatch {
    BundlePatch::new(1 + rng.below(3), 1 + rng.below(3)).unwrap()
}

fn random_field(rng: &mut SampleRng, patch: &BundlePatch) -> TotalVectorField {
    let vars: Vec<Var> = (0..patch.m).map(Var::X).chain((0..patch.n).map(Var::F)).collect();
    let a = (0..patch.m).map(|_| random_polynomial(rng, &vars, 2, 3)).collect();
    let b = (0..patch.n).map(|_| random_polynomial(rng, &vars, 2, 3)).collect();
    TotalVectorField::new(patch.clone(), a, b).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let dims = Dims::new(3, 3);
        let e = random_expr(&mut rng, dims, 5);
        let printed = e.to_string();
        prop_assert_eq!(parse(&printed, dims).unwrap(), e, "{}", printed);
    }

    #[test]
    fn partials_match_finite_differences(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let vars = [Var::X(0), Var::X(1), Var::F(0)];
        let e = random_polynomial(&mut rng, &vars, 3, 4);
        let p = rng.point(2, 1, 1.0);
        let h = 1e-5;
        for var in vars {
            let shifted = |d: f64| {
                let mut q = p.clone();
                match var {
                    Var::X(i) => q.x[i] += d,
                    Var::F(i) => q.f[i] += d,
                }
                eval(&e, &q).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let ad = partial(&e, &p, var).unwrap();
            prop_assert!((fd - ad).abs() <= 1e-7 * ad.abs().max(1.0), "{e}: {fd} vs {ad}");
        }
    }

    #[test]
    fn projector_identities(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let patch = random_patch(&mut rng);
        let g = random_christoffel(&mut rng, &patch);
        let p = rng.point(patch.m, patch.n, 1.0);
        let t = TotalTangent { at: p.clone(), a: rng.vector(patch.m, -1.0, 1.0), b: rng.vector(patch.n, -1.0, 1.0) };
        let once = g.project(&t).unwrap();
        let twice = g.project(&TotalTangent::embed(&once)).unwrap();
        prop_assert!(max_diff(&once.w, &twice.w) <= 1e-12);
        let h = g.horizontal_lift(&p, &rng.vector(patch.m, -1.0, 1.0)).unwrap();
        prop_assert!(g.project(&h).unwrap().norm() <= 1e-12);
        let c = g.curvature_coefficients(&p).unwrap();
        prop_assert!(c.antisymmetry_defect() <= 1e-12);
    }

    #[test]
    fn nijenhuis_matches_coefficients(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let patch = random_patch(&mut rng);
        let g = random_christoffel(&mut rng, &patch);
        let p = rng.point(patch.m, patch.n, 1.0);
        let c = g.curvature_coefficients(&p).unwrap();
        for mu in 0..patch.m {
            for nu in 0..patch.m {
                let r = g.nijenhuis_coordinate(mu, nu, &p).unwrap();
                prop_assert!(max_diff(&r.w, &c.column(mu, nu)) <= 1e-9);
            }
        }
    }

    #[test]
    fn two_and_four_term_forms_agree(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let patch = random_patch(&mut rng);
        let g = random_christoffel(&mut rng, &patch);
        let v = random_field(&mut rng, &patch);
        let w = random_field(&mut rng, &patch);
        let p = rng.point(patch.m, patch.n, 1.0);
        let two = g.nijenhuis_two_term(&v, &w, &p).unwrap();
        let four = g.nijenhuis_four_term(&v, &w, &p).unwrap();
        let scale = two.w.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        prop_assert!(max_diff(&two.w, &four.b) <= 1e-9 * scale);
        prop_assert!(four.a.iter().all(|c| c.abs() <= 1e-9 * scale));
    }

    #[test]
    fn bracket_antisymmetry_and_jacobi(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let patch = random_patch(&mut rng);
        let u = random_field(&mut rng, &patch);
        let v = random_field(&mut rng, &patch);
        let w = random_field(&mut rng, &patch);
        let p = rng.point(patch.m, patch.n, 1.0);
        let uv = lie_bracket(&u, &v, &p).unwrap();
        let vu = lie_bracket(&v, &u, &p).unwrap();
        let sum: Vec<f64> = uv.a.iter().chain(&uv.b).zip(vu.a.iter().chain(&vu.b)).map(|(x, y)| x + y).collect();
        prop_assert!(sum.iter().all(|c| c.abs() <= 1e-9));

        let field = bracket_field(&u, &v).unwrap().at(&p).unwrap();
        prop_assert!(max_diff(&field.b, &uv.b) <= 1e-9 && max_diff(&field.a, &uv.a) <= 1e-9);

        let j1 = lie_bracket(&bracket_field(&u, &v).unwrap(), &w, &p).unwrap();
        let j2 = lie_bracket(&bracket_field(&v, &w).unwrap(), &u, &p).unwrap();
        let j3 = lie_bracket(&bracket_field(&w, &u).unwrap(), &v, &p).unwrap();
        let scale = [&j1, &j2, &j3].iter().flat_map(|t| t.a.iter().chain(&t.b)).fold(1.0f64, |s, x| s.max(x.abs()));
        for i in 0..patch.m {
            prop_assert!((j1.a[i] + j2.a[i] + j3.a[i]).abs() <= 1e-9 * scale);
        }
        for i in 0..patch.n {
            prop_assert!((j1.b[i] + j2.b[i] + j3.b[i]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn theta_identities(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let n = 1 + rng.below(3);
        let j = SecondJet {
            x: rng.vector(2, -1.0, 1.0),
            f: rng.vector(n, -1.0, 1.0),
            fdot: rng.vector(n, -1.0, 1.0),
            fcirc: rng.vector(n, -1.0, 1.0),
            fcircdot: rng.vector(n, -1.0, 1.0),
        };
        prop_assert_eq!(theta(&theta(&j)), j.clone());
        prop_assert_eq!(pi(&theta(&j)), pi(&j).swap());

        let vars: Vec<Var> = (0..n).map(Var::F).collect();
        let h: Vec<Expr> = (0..n).map(|_| random_polynomial(&mut rng, &vars, 3, 4)).collect();
        let a = pushforward_second_jet(&h, &theta(&j)).unwrap();
        let b = theta(&pushforward_second_jet(&h, &j).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn commutator_matches_coefficients(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let patch = random_patch(&mut rng);
        let g = random_christoffel(&mut rng, &patch);
        let s = random_section(&mut rng, &patch);
        let x = rng.vector(patch.m, -1.0, 1.0);
        let c = g.curvature_coefficients(&s.point(&x).unwrap()).unwrap();
        for mu in 0..patch.m {
            for nu in 0..patch.m {
                let r = commutator_curvature(&g, &s, mu, nu, &x).unwrap();
                let scale = r.w.iter().fold(1.0f64, |s, v| s.max(v.abs()));
                prop_assert!(max_diff(&r.w, &c.column(mu, nu)) <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn induced_connection_matches_section_families(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let patch = random_patch(&mut rng);
        let g = random_christoffel(&mut rng, &patch);
        let s = random_section(&mut rng, &patch);
        let delta = random_section(&mut rng, &patch);
        let x = rng.vector(patch.m, -1.0, 1.0);
        let mu = rng.below(patch.m);
        let family = |eps: f64| {
            let comps = s.comps.iter().zip(&delta.comps)
                .map(|(a, d)| Expr::sum([a.clone(), Expr::product(Expr::constant(eps), d.clone())]))
                .collect();
            Section::new(patch.clone(), comps).unwrap()
        };
        let h = 1e-5;
        let plus = g.covariant_derivative(&family(h), mu, &x).unwrap().w;
        let minus = g.covariant_derivative(&family(-h), mu, &x).unwrap().w;
        let fd: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();

        let vert = vertical_connection(&g).unwrap();
        let pair = Section::new(
            BundlePatch::new(patch.m, 2 * patch.n).unwrap(),
            s.comps.iter().chain(&delta.comps).cloned().collect(),
        ).unwrap();
        let d = vert.covariant_derivative(&pair, mu, &x).unwrap().w;
        let scale = fd.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        prop_assert!(max_diff(&fd, &d[patch.n..]) <= 1e-5 * scale);
    }

    #[test]
    fn exp_matches_long_series(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        for alg in [MatrixLieAlgebra::so3(), MatrixLieAlgebra::sl2(), MatrixLieAlgebra::so2()] {
            let mut x = alg.matrix(&AlgebraElement::new(rng.vector(alg.k, -1.0, 1.0)));
            let norm = x.norm();
            if norm > 2.0 {
                x *= 2.0 / norm;
            }
            let mut term = DMatrix::identity(alg.d, alg.d);
            let mut series = term.clone();
            for j in 1..60 {
                term = &term * &x / j as f64;
                series += &term;
            }
            prop_assert!((expm(&x) - series).norm() <= 1e-12);
        }
    }

    #[test]
    fn adjoint_respects_brackets(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        for alg in [MatrixLieAlgebra::so3(), MatrixLieAlgebra::sl2()] {
            let g = alg.exp(&AlgebraElement::new(rng.vector(alg.k, -1.0, 1.0))).unwrap();
            let x = AlgebraElement::new(rng.vector(alg.k, -1.0, 1.0));
            let y = AlgebraElement::new(rng.vector(alg.k, -1.0, 1.0));
            let lhs = alg.adjoint(&g, &alg.bracket(&x, &y).unwrap()).unwrap();
            let rhs = alg.bracket(&alg.adjoint(&g, &x).unwrap(), &alg.adjoint(&g, &y).unwrap()).unwrap();
            prop_assert!(lhs.max_deviation(&rhs) <= 1e-9);
        }
    }

    #[test]
    fn omega_is_equivariant_and_vertical(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let alg = MatrixLieAlgebra::so3();
        let vars = [Var::X(0), Var::X(1)];
        let comps = (0..3).map(|_| (0..2).map(|_| random_polynomial(&mut rng, &vars, 2, 3)).collect()).collect();
        let p = GaugePotential::new(alg.clone(), 2, comps).unwrap();
        let g = alg.exp(&AlgebraElement::new(rng.vector(3, -1.0, 1.0))).unwrap();
        let gamma = alg.exp(&AlgebraElement::new(rng.vector(3, -1.0, 1.0))).unwrap();
        let t = PrincipalTangent {
            x: rng.vector(2, -1.0, 1.0),
            g: g.clone(),
            xi: rng.vector(2, -1.0, 1.0),
            v: AlgebraElement::new(rng.vector(3, -1.0, 1.0)),
        };
        // right translation by γ sends the fiber velocity gV to gVγ = (gγ)(γ⁻¹Vγ)
        let gi = gamma.inverse().unwrap();
        let moved = PrincipalTangent {
            g: g.mul(&gamma),
            v: alg.adjoint(&gi, &t.v).unwrap(),
            ..t.clone()
        };
        let lhs = omega_eval(&p, &moved).unwrap();
        let rhs = alg.adjoint(&gi, &omega_eval(&p, &t).unwrap()).unwrap();
        prop_assert!(lhs.max_deviation(&rhs) <= 1e-9);

        let w = &g.g * alg.matrix(&t.v);
        let vertical = PrincipalTangent { xi: vec![0.0, 0.0], ..t.clone() };
        prop_assert_eq!(omega_eval(&p, &vertical).unwrap(), t.v.clone());
        prop_assert!(vtriv_principal(&alg, &g, &w).unwrap().max_deviation(&t.v) <= 1e-12);
    }

    #[test]
    fn linear_layer_properties(seed in any::<u64>()) {
        let mut rng = SampleRng::new(seed);
        let patch = random_patch(&mut rng);
        let vars: Vec<Var> = (0..patch.m).map(Var::X).collect();
        let gamma3 = (0..patch.n)
            .map(|_| (0..patch.m).map(|_| (0..patch.n).map(|_| random_polynomial(&mut rng, &vars, 2, 3)).collect()).collect())
            .collect();
        let l = LinearChristoffel::new(patch.clone(), gamma3).unwrap();
        let x = rng.vector(patch.m, -1.0, 1.0);

        let c = classical_curvature(&l, &x).unwrap();
        for a in 0..patch.n {
            for mu in 0..patch.m {
                for nu in 0..patch.m {
                    for w in 0..patch.n {
                        prop_assert!((c.get(a, mu, nu, w) + c.get(a, nu, mu, w)).abs() <= 1e-12);
                    }
                }
            }
        }

        let s = random_section(&mut rng, &patch);
        let lambda = rng.uniform(-3.0, 3.0);
        let scaled = Section::new(
            patch.clone(),
            s.comps.iter().map(|e| Expr::product(Expr::constant(lambda), e.clone())).collect(),
        ).unwrap();
        let t = random_section(&mut rng, &patch);
        let sum = Section::new(
            patch.clone(),
            s.comps.iter().zip(&t.comps).map(|(a, b)| Expr::sum([a.clone(), b.clone()])).collect(),
        ).unwrap();
        let mu = rng.below(patch.m);
        let ds = reduced_covariant(&l, &s, mu, &x).unwrap();
        let dl = reduced_covariant(&l, &scaled, mu, &x).unwrap();
        let dt = reduced_covariant(&l, &t, mu, &x).unwrap();
        let dsum = reduced_covariant(&l, &sum, mu, &x).unwrap();
        for a in 0..patch.n {
            prop_assert!((dl[a] - lambda * ds[a]).abs() <= 1e-12 * ds[a].abs().max(1.0) * lambda.abs().max(1.0));
            prop_assert!((dsum[a] - ds[a] - dt[a]).abs() <= 1e-12 * dsum[a].abs().max(1.0));
        }

        let g = expand_linear(&l);
        let samples: Vec<EvalPoint> = (0..4).map(|_| rng.point(patch.m, patch.n, 1.0)).collect();
        for lambda in [-1.0, 0.5, 2.0] {
            let comps = (0..patch.n).map(|a| Expr::product(Expr::constant(lambda), Expr::f(a))).collect();
            let scale = FiberBundleMorphism::new(patch.clone(), patch.clone(), comps).unwrap();
            let r = is_parallel_morphism(&scale, &g, &g, &samples, 1e-9).unwrap();
            prop_assert!(r.parallel, "{r:?}");
        }
    }
}

#[test]
fn random_fields_respect_patch_dims() {
    let mut rng = SampleRng::new(3);
    for _ in 0..20 {
        let patch = random_patch(&mut rng);
        let g = random_christoffel(&mut rng, &patch);
        assert!(ChristoffelField::new(patch.clone(), g.gamma.clone()).is_ok());
    }
}
