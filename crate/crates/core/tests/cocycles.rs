mod common;

use std::sync::Arc;

use common::{exact_cases, float_cases, q, rational_point, Q};
use jetcocycle::cocycles::{
    action_axiom_residuals, bracket_antisymmetry_residual, chevalley_eilenberg_residual, connection_cocycle,
    derham_cocycle, derham_path_integral, divergence_cocycle, group_algebra_consistency, group_discrepancy,
    jacobi_residual, lie_derivative_connection, log_volume_cocycle, moyal_p3, schwarzian_1d,
    vect_embedding_cocycle, verify_algebra_cocycle, verify_group_cocycle, AlgebraCocycle, Arrangement,
    ConnectionCocycle, ConsistencyPair, DeRham, Divergence, GroupCocycle, LieDerivativeConnection,
    LiftedConnectionCocycle, LogVolume, OperatorCocycle, Schwarzian, Vey,
};
use jetcocycle::geometry::{table_values, ConnectionRef, FlatConnection, PolyConnection};
use jetcocycle::maps::{catalog_get, jacobian_at, MapRef, PolyVectorField, VectorFieldRef};
use jetcocycle::numkernel::linalg::determinant;
use jetcocycle::numkernel::poly::JetFunction;
use jetcocycle::numkernel::{Poly, Scalar};
use jetcocycle::operators::Symbol;
use jetcocycle::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn flat<S: Scalar>(n: usize) -> ConnectionRef<S> {
    Arc::new(FlatConnection { dim: n })
}

fn field<S: Scalar>(components: Vec<Poly<S>>) -> VectorFieldRef<S> {
    Arc::new(PolyVectorField::new(components).unwrap())
}

fn x_pow<S: Scalar>(k: u32, c: i64) -> Poly<S> {
    Poly::var(1, 0).pow(k).scale(&S::from_i64(c))
}

/// Consecutive pairs `(f, h)` with a point where `f∘h` is regular.
fn exact_pairs(seed: u64, dim: usize) -> Vec<(MapRef<Q>, MapRef<Q>, Vec<Q>)> {
    let cases = exact_cases(seed, dim);
    let mut out = Vec::new();
    for i in 0..cases.len() {
        let (f, _) = &cases[i];
        let (h, x) = &cases[(i + 1) % cases.len()];
        let hx = h.apply(x).unwrap();
        if jacobian_at(f.as_ref(), &hx).map(|j| determinant(&j) != q(0, 1)).unwrap_or(false) {
            out.push((f.clone(), h.clone(), x.clone()));
        }
    }
    out
}

fn lift_point(x: &[Q], rng: &mut ChaCha8Rng) -> Vec<Q> {
    let mut p = x.to_vec();
    p.extend(rational_point(rng, x.len()));
    p
}

#[test]
fn operator_cocycle_through_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dim in [1, 2] {
        let c = OperatorCocycle { gamma: Arc::new(PolyConnection::random(&mut rng, dim, 1, 0.5)) as ConnectionRef<Q> };
        for (f, h, x) in exact_pairs(70 + dim as u64, dim) {
            let p = lift_point(&x, &mut rng);
            let report = verify_group_cocycle(&c, &f, &h, &[p], 0.0, Arrangement::Declared);
            assert!(report.all_pass(), "{:?}", report.cases);
        }
    }
}

#[test]
fn identity_pair_is_trivial() {
    let id: MapRef<Q> = catalog_get("identity", &json!({}), 1).unwrap();
    let c = OperatorCocycle { gamma: flat::<Q>(1) };
    let d = group_discrepancy(&c, &id, &id, &[q(1, 2), q(3, 1)], Arrangement::Declared).unwrap();
    assert!(d.exact_zero);
    assert!(c.evaluate(&id, &[q(1, 2), q(3, 1)]).unwrap().is_zero());
}

#[test]
fn wrong_convention_is_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f: MapRef<Q> = catalog_get("polynomial_perturbation", &json!({"eps": 1}), 1).unwrap();
    let h: MapRef<Q> = catalog_get("affine", &json!({"a": 2, "b": "1/3"}), 1).unwrap();
    let c = LiftedConnectionCocycle { gamma: Arc::new(PolyConnection::random(&mut rng, 1, 1, 0.8)) as ConnectionRef<Q> };
    let p = vec![q(1, 2), q(2, 3)];
    assert!(group_discrepancy(&c, &f, &h, &p, Arrangement::Declared).unwrap().exact_zero);
    let bad = group_discrepancy(&c, &f, &h, &p, Arrangement::Swapped).unwrap();
    assert!(!bad.exact_zero && bad.abs > 1e-6);
    let report = verify_group_cocycle(&c, &f, &h, &[p], 0.0, Arrangement::Swapped);
    assert!(!report.all_pass());
}

#[test]
fn action_axioms_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gamma: ConnectionRef<Q> = Arc::new(PolyConnection::random(&mut rng, 1, 1, 0.8));
    let phi = Poly::<Q>::random(&mut rng, 1, 3, 0.8);
    let cocycles: Vec<Box<dyn GroupCocycle<Q>>> = vec![
        Box::new(ConnectionCocycle { gamma: gamma.clone() }),
        Box::new(LiftedConnectionCocycle { gamma: gamma.clone() }),
        Box::new(DeRham { potential: phi }),
        Box::new(Schwarzian),
        Box::new(OperatorCocycle { gamma }),
    ];
    let pairs = exact_pairs(4, 1);
    for c in &cocycles {
        for (f, h, x) in &pairs {
            let g = &pairs[0].0;
            let p = if c.on_cotangent() { lift_point(x, &mut rng) } else { x.clone() };
            let (unit, comp) = action_axiom_residuals(c.as_ref(), f, h, g, &p).unwrap();
            assert!(unit.exact_zero && comp.exact_zero, "{} {} {}", c.name(), f.label(), h.label());
        }
    }
}

#[test]
fn log_volume_examples() {
    let a: MapRef<f64> = catalog_get("linear", &json!({"a": [[2, 1], [1, 3]]}), 2).unwrap();
    assert!((log_volume_cocycle(&a, &[0.3, -0.2]).unwrap() - Scalar::ln(&5f64).unwrap()).abs() < 1e-14);
    let cubic: MapRef<f64> = catalog_get("polynomial_perturbation", &json!({"eps": 1}), 1).unwrap();
    for x in [0.0, 0.5, -1.25] {
        let want = f64::ln(1.0 + 3.0 * x * x);
        assert!((log_volume_cocycle(&cubic, &[x]).unwrap() - want).abs() < 1e-14);
    }
    let shear: MapRef<Q> = catalog_get("linear", &json!({"a": [[1, 5], [0, 1]]}), 2).unwrap();
    assert_eq!(log_volume_cocycle(&shear, &[q(1, 1), q(2, 1)]).unwrap(), q(0, 1));
    let flip: MapRef<f64> = catalog_get("linear", &json!({"a": -1}), 1).unwrap();
    assert!(matches!(log_volume_cocycle(&flip, &[0.5]), Err(Error::Domain(_))));
    let two: MapRef<Q> = catalog_get("linear", &json!({"a": 2}), 1).unwrap();
    assert!(matches!(log_volume_cocycle(&two, &[q(1, 1)]), Err(Error::Unsupported { .. })));
}

#[test]
fn log_volume_identity_float() {
    for dim in [1, 2] {
        let cases = float_cases(80 + dim as u64, dim);
        for i in 0..cases.len() {
            let (f, _) = &cases[i];
            let (h, x) = &cases[(i + 3) % cases.len()];
            let hx = h.apply(x).unwrap();
            if determinant(&jacobian_at(f.as_ref(), &hx).unwrap()) <= 1e-6 {
                continue;
            }
            let d = group_discrepancy(&LogVolume, f, h, x, Arrangement::Declared).unwrap();
            assert!(d.abs < 1e-9, "{} {} {}", f.label(), h.label(), d.abs);
        }
    }
}

#[test]
fn connection_cocycle_examples() {
    let affine: MapRef<Q> = catalog_get("affine", &json!({"a": [[1, 2], [0, 3]], "b": [1, 1]}), 2).unwrap();
    let c = connection_cocycle(&affine, &flat(2)).unwrap().components(&[q(1, 3), q(-1, 2)], 1).unwrap();
    assert!(table_values(&c).iter().flatten().flatten().all(|v| *v == q(0, 1)));
    let cubic: MapRef<Q> = catalog_get("polynomial_perturbation", &json!({"eps": 1}), 1).unwrap();
    for x in [q(0, 1), q(1, 2), q(-2, 3)] {
        let c = connection_cocycle(&cubic, &flat(1)).unwrap().components(std::slice::from_ref(&x), 0).unwrap();
        let want = q(6, 1) * x.clone() / (q(1, 1) + q(3, 1) * x.clone() * x.clone());
        assert_eq!(c[0][0][0].value(), want);
    }
}

#[test]
fn classical_group_cocycles_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in [1, 2] {
        let gamma: ConnectionRef<Q> = Arc::new(PolyConnection::random(&mut rng, dim, 2, 0.5));
        let phi = Poly::<Q>::random(&mut rng, dim, 3, 0.7);
        let mut list: Vec<Box<dyn GroupCocycle<Q>>> =
            vec![Box::new(ConnectionCocycle { gamma }), Box::new(DeRham { potential: phi })];
        if dim == 1 {
            list.push(Box::new(Schwarzian));
        }
        for c in &list {
            for (f, h, x) in exact_pairs(90 + dim as u64, dim) {
                let report = verify_group_cocycle(c.as_ref(), &f, &h, &[x], 0.0, Arrangement::Declared);
                assert!(report.all_pass(), "{} {:?}", c.name(), report.cases);
            }
        }
    }
}

#[test]
fn derham_examples() {
    let sq = x_pow::<Q>(2, 1);
    let id: MapRef<Q> = catalog_get("identity", &json!({}), 1).unwrap();
    assert_eq!(derham_cocycle(&sq, &id, &[q(7, 3)]).unwrap(), q(0, 1));
    let shift: MapRef<Q> = catalog_get("translation", &json!({"b": 1}), 1).unwrap();
    assert_eq!(derham_cocycle(&sq, &shift, &[q(0, 1)]).unwrap(), q(1, 1));
    let sq64 = x_pow::<f64>(2, 1);
    assert!((derham_path_integral(&sq64, &[0.0], &[1.0]).unwrap() - 1.0).abs() < 1e-14);
    // a degree-7 potential in two variables along a slanted segment
    let p = Poly::<f64>::from_terms(2, [(vec![4, 3], 1.0), (vec![0, 1], -2.0)]);
    let (x, y) = ([0.25, -0.5], [1.5, 0.75]);
    let want = p.value(&y).unwrap() - p.value(&x).unwrap();
    assert!((derham_path_integral(&p, &x, &y).unwrap() - want).abs() < 1e-12);
}

#[test]
fn schwarzian_examples() {
    let affine: MapRef<Q> = catalog_get("affine", &json!({"a": 3, "b": -2}), 1).unwrap();
    assert_eq!(schwarzian_1d(&affine, &[q(5, 7)]).unwrap(), q(0, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let params = jetcocycle::maps::sample_params(&mut rng, "moebius", 1).unwrap();
        let m: MapRef<Q> = catalog_get("moebius", &params, 1).unwrap();
        for x in [q(0, 1), q(1, 3), q(-5, 2)] {
            if let Ok(s) = schwarzian_1d(&m, &[x]) {
                assert_eq!(s, q(0, 1));
            }
        }
    }
    let exp: MapRef<f64> = catalog_get("exp_scale", &json!({"s": 1}), 1).unwrap();
    for x in [-1.0, 0.0, 0.7] {
        assert!((schwarzian_1d(&exp, &[x]).unwrap() + 0.5).abs() < 1e-12);
    }
    let fold: MapRef<Q> = catalog_get("polynomial_perturbation", &json!({"eps": "-1/3"}), 1).unwrap();
    assert!(matches!(schwarzian_1d(&fold, &[q(1, 1)]), Err(Error::Domain(_))));
}

#[test]
fn float_group_cocycles_relative() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for dim in [1, 2] {
        let gamma: ConnectionRef<f64> = Arc::new(PolyConnection::random(&mut rng, dim, 1, 0.5));
        let cases = float_cases(100 + dim as u64, dim);
        for i in 0..cases.len() {
            let (f, _) = &cases[i];
            let (h, x) = &cases[(i + 1) % cases.len()];
            let c = ConnectionCocycle { gamma: gamma.clone() };
            let d = group_discrepancy(&c, f, h, x, Arrangement::Declared).unwrap();
            assert!(d.passes(false, 1e-8), "{} {} {:?}", f.label(), h.label(), d);
        }
    }
}

#[test]
fn divergence_examples() {
    let constant = field(vec![Poly::<Q>::constant(1, q(4, 1))]);
    assert_eq!(divergence_cocycle(constant.as_ref(), &[q(2, 1)], &q(1, 1), None).unwrap(), q(0, 1));
    let euler = field(vec![x_pow::<Q>(1, 1)]);
    assert_eq!(divergence_cocycle(euler.as_ref(), &[q(2, 1)], &q(1, 1), None).unwrap(), q(1, 1));
    let phi = x_pow::<Q>(2, 1);
    // a·1 + x·2x at x = 2
    assert_eq!(divergence_cocycle(euler.as_ref(), &[q(2, 1)], &q(3, 1), Some(&phi)).unwrap(), q(11, 1));
}

#[test]
fn lie_derivative_examples() {
    let constant = field(vec![Poly::<Q>::constant(2, q(1, 1)), Poly::constant(2, q(-3, 1))]);
    let l = lie_derivative_connection(constant.as_ref(), &flat(2), &[q(1, 1), q(2, 1)]).unwrap();
    assert!(l.iter().flatten().flatten().all(|v| *v == q(0, 1)));
    let quad = field(vec![x_pow::<Q>(2, 1)]);
    for x in [q(0, 1), q(5, 3)] {
        assert_eq!(lie_derivative_connection(quad.as_ref(), &flat(1), &[x]).unwrap()[0][0][0], q(2, 1));
    }
}

#[test]
fn brackets_are_lie() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for dim in [1, 2, 3] {
        let fields: Vec<VectorFieldRef<Q>> =
            (0..3).map(|_| Arc::new(PolyVectorField::random(&mut rng, dim, 3)) as VectorFieldRef<Q>).collect();
        let p = rational_point(&mut rng, dim);
        assert!(bracket_antisymmetry_residual(&fields[0], &fields[1], &p, 2).unwrap().iter().all(|j| j.is_zero()));
        assert!(jacobi_residual(&fields[0], &fields[1], &fields[2], &p, 2).unwrap().iter().all(|j| j.is_zero()));
    }
}

#[test]
fn algebra_cocycles_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for dim in [1, 2] {
        let gamma: ConnectionRef<Q> = Arc::new(PolyConnection::random(&mut rng, dim, 2, 0.5));
        let base: Vec<Box<dyn AlgebraCocycle<Q>>> = vec![
            Box::new(Divergence { a: q(3, 2), potential: Some(Poly::random(&mut rng, dim, 3, 0.7)) }),
            Box::new(LieDerivativeConnection { gamma }),
            Box::new(Vey { probe: Arc::new(Poly::<Q>::random(&mut rng, 2 * dim, 4, 0.5)) }),
        ];
        for c in &base {
            for _ in 0..3 {
                let x: VectorFieldRef<Q> = Arc::new(PolyVectorField::random(&mut rng, dim, 3));
                let y: VectorFieldRef<Q> = Arc::new(PolyVectorField::random(&mut rng, dim, 3));
                let p = rational_point(&mut rng, if c.on_cotangent() { 2 * dim } else { dim });
                let report = verify_algebra_cocycle(c.as_ref(), &x, &y, &[p], 0.0);
                assert!(report.all_pass(), "{} {:?}", c.name(), report.cases);
            }
        }
    }
}

#[test]
fn moyal_examples() {
    let xi3 = Poly::<Q>::var(2, 1).pow(3);
    let x3 = Poly::<Q>::var(2, 0).pow(3);
    let p = [q(1, 2), q(-1, 3)];
    assert_eq!(moyal_p3(&xi3, &x3, &p).unwrap(), q(-36, 1));
    assert_eq!(moyal_p3(&x3, &xi3, &p).unwrap(), q(36, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let low = Poly::<Q>::random(&mut rng, 2, 2, 1.0);
    let any = Poly::<Q>::random(&mut rng, 2, 5, 0.8);
    assert_eq!(moyal_p3(&low, &any, &p).unwrap(), q(0, 1));
    assert_eq!(moyal_p3(&any, &low, &p).unwrap(), q(0, 1));
}

#[test]
fn chevalley_eilenberg_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in [1, 2] {
        for degrees in [[2, 2, 2], [3, 2, 1], [4, 1, 1], [3, 3, 0], [2, 3, 1]] {
            let polys: Vec<Poly<Q>> = degrees.iter().map(|&d| Poly::random(&mut rng, 2 * dim, d, 0.7)).collect();
            let p = rational_point(&mut rng, 2 * dim);
            let r = chevalley_eilenberg_residual(&polys[0], &polys[1], &polys[2], &p).unwrap();
            assert_eq!(r, q(0, 1), "{degrees:?}");
        }
    }
}

/// `Σ over ordered triples of g g g ∂³F ∂³G` with `g` as an explicit matrix.
fn p3_oracle(f: &Poly<Q>, g: &Poly<Q>, n: usize) -> Poly<Q> {
    let d = 2 * n;
    let gm = |a: usize, b: usize| -> i64 {
        if a < n && b == a + n {
            1
        } else if a >= n && b + n == a {
            -1
        } else {
            0
        }
    };
    let mut acc = Poly::zero(d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for i2 in 0..d {
                    for j2 in 0..d {
                        for k2 in 0..d {
                            let w = gm(i, i2) * gm(j, j2) * gm(k, k2);
                            if w == 0 {
                                continue;
                            }
                            let df = f.partial(i).unwrap().partial(j).unwrap().partial(k).unwrap();
                            let dg = g.partial(i2).unwrap().partial(j2).unwrap().partial(k2).unwrap();
                            acc = acc.add(&df.mul(&dg).scale(&Q::from_i64(w)));
                        }
                    }
                }
            }
        }
    }
    acc
}

fn check_embedding(x: &PolyVectorField<Q>, p: &Symbol<Q>, at: &[Q]) -> Symbol<Q> {
    let n = p.base_dim();
    let out = vect_embedding_cocycle(x, p, at).unwrap();
    let fx = x.components.iter().enumerate().fold(Poly::zero(2 * n), |acc, (i, c)| {
        acc.add(&c.embed(2 * n, &(0..n).collect::<Vec<_>>()).mul(&Poly::var(2 * n, n + i)))
    });
    let oracle = p3_oracle(&fx, &p.to_poly(), n);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..3 {
        let mut pt = at.to_vec();
        pt.extend(rational_point(&mut rng, n));
        assert_eq!(out.to_poly().eval(&pt).unwrap(), oracle.eval(&pt).unwrap());
    }
    out
}

#[test]
fn vect_embedding_examples() {
    let constant = PolyVectorField::new(vec![Poly::<Q>::constant(1, q(2, 1))]).unwrap();
    let xi3 = Symbol::from_poly(1, &Poly::<Q>::var(2, 1).pow(3)).unwrap();
    assert!(vect_embedding_cocycle(&constant, &xi3, &[q(1, 1)]).unwrap().is_zero());

    let cube = PolyVectorField::new(vec![x_pow::<Q>(3, 1)]).unwrap();
    let xi2 = Symbol::from_poly(1, &Poly::<Q>::var(2, 1).pow(2)).unwrap();
    let out = check_embedding(&cube, &xi2, &[q(1, 2)]);
    assert!(out.degree().is_none_or(|d| d == 0));
    // P³(x³ξ, ξ³) = 6ξ · 6
    let out = check_embedding(&cube, &xi3, &[q(1, 2)]);
    let mut want = Symbol::zero(1);
    want.add_term(&[1], Poly::constant(1, q(36, 1))).unwrap();
    assert_eq!(out, want);
}

#[test]
fn vect_embedding_lowers_degree() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in [1, 2] {
        for k in 2..=5 {
            let x = PolyVectorField::<Q>::random(&mut rng, n, 4);
            let p = Symbol::random(&mut rng, n, k, 2);
            let at = rational_point(&mut rng, n);
            let out = check_embedding(&x, &p, &at);
            assert!(out.degree().is_none_or(|d| d + 2 <= k));
        }
    }
}

#[test]
fn consistency_log_volume() {
    let euler = field(vec![x_pow::<f64>(1, 1)]);
    let points = vec![vec![0.3], vec![-1.2]];
    let report = group_algebra_consistency(&euler, &ConsistencyPair::LogVolume, 1e-3, &points);
    assert!(report.all_pass(), "{:?}", report.cases);
    assert!(report.max_residual() < 1e-3);

    let zero = field(vec![Poly::<f64>::zero(1)]);
    let report = group_algebra_consistency(&zero, &ConsistencyPair::LogVolume, 1e-3, &points);
    assert!(report.all_pass() && report.max_residual() == 0.0);

    let quad = field(vec![x_pow::<f64>(2, 1)]);
    let report = group_algebra_consistency(&quad, &ConsistencyPair::LogVolume, 1e-3, &points);
    assert!(report.all_pass(), "{:?}", report.cases);
    assert!(report.max_residual() > 1e-10);
}

#[test]
fn consistency_connection() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for dim in [1, 2] {
        let x: VectorFieldRef<f64> = Arc::new(PolyVectorField::random(&mut rng, dim, 3));
        let points: Vec<Vec<f64>> = (0..2).map(|_| rational_point(&mut rng, dim).iter().map(Scalar::to_f64).collect()).collect();
        for gamma in [flat::<f64>(dim), Arc::new(PolyConnection::random(&mut rng, dim, 2, 0.5)) as ConnectionRef<f64>] {
            let report = group_algebra_consistency(&x, &ConsistencyPair::Connection(gamma), 1e-3, &points);
            assert!(report.all_pass(), "{:?}", report.cases);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moyal_antisymmetric(seed in any::<u64>(), n in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Poly::<Q>::random(&mut rng, 2 * n, 4, 0.5);
        let g = Poly::<Q>::random(&mut rng, 2 * n, 4, 0.5);
        let p = rational_point(&mut rng, 2 * n);
        prop_assert_eq!(moyal_p3(&f, &g, &p).unwrap(), -moyal_p3(&g, &f, &p).unwrap());
    }

    #[test]
    fn schwarzian_chain_rule_float(a in 0.5f64..2.0, b in -1.0f64..1.0, x in -0.5f64..0.5) {
        let f: MapRef<f64> = catalog_get("polynomial_perturbation", &json!({"eps": 0.25}), 1).unwrap();
        let h: MapRef<f64> = catalog_get("affine", &json!({"a": a, "b": b}), 1).unwrap();
        let d = group_discrepancy(&Schwarzian, &f, &h, &[x], Arrangement::Declared).unwrap();
        prop_assert!(d.passes(false, 1e-10));
    }
}
