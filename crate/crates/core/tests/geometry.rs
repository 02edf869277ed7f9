mod common;

use std::sync::Arc;

use common::{exact_cases, q, rational_point, Q};
use jetcocycle::geometry::{
    cocycle_c, covariant_derivs, is_symmetric, lift_connection, pullback_connection, table_add,
    table_is_zero, table_sub, tensor_pullback, Connection, ConnectionRef, FlatConnection,
    PolyConnection,
};
use jetcocycle::maps::{catalog_get, compose, cotangent_lift, ensure_regular, MapRef};
use jetcocycle::numkernel::linalg::{inverse, jacobian_values};
use jetcocycle::numkernel::{Jet, Poly, Scalar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn gamma_x() -> ConnectionRef<Q> {
    // n = 1, Γ^1_11 = x
    Arc::new(PolyConnection::new(vec![vec![vec![Poly::var(1, 0)]]]).unwrap())
}

fn random_connection(seed: u64, dim: usize) -> ConnectionRef<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Arc::new(PolyConnection::<Q>::random(&mut rng, dim, 2, 0.5))
}

#[test]
fn flat_lifts_to_flat() {
    let flat: ConnectionRef<Q> = Arc::new(FlatConnection { dim: 2 });
    let lifted = lift_connection(&flat);
    let t = lifted.christoffel(&[q(1, 2), q(1, 3), q(-1, 1), q(2, 1)], 3).unwrap();
    assert!(table_is_zero(&t));
}

#[test]
fn lifted_linear_christoffel() {
    let lifted = lift_connection(&gamma_x());
    let (x, y) = (Poly::<Q>::var(2, 0), Poly::<Q>::var(2, 1));
    // ξ(2x² - 1) and -x as polynomials on T*M
    let barred = y.mul(&x.pow(2).scale(&q(2, 1)).sub(&Poly::constant(2, q(1, 1))));
    let mixed = x.neg();
    for p in [[q(0, 1), q(1, 1)], [q(1, 3), q(-2, 5)], [q(-3, 2), q(7, 4)]] {
        let t = lifted.christoffel(&p, 3).unwrap();
        assert_eq!(t[0][0][0], x.jet_at(&p, 3).unwrap());
        assert_eq!(t[1][0][0], barred.jet_at(&p, 3).unwrap());
        assert_eq!(t[1][0][1], mixed.jet_at(&p, 3).unwrap());
        assert_eq!(t[1][1][0], mixed.jet_at(&p, 3).unwrap());
        for (k, i, j) in [(0, 0, 1), (0, 1, 0), (0, 1, 1), (1, 1, 1)] {
            assert!(t[k][i][j].is_zero(), "component {k} {i} {j}");
        }
    }
}

#[test]
fn lifted_connection_symmetric_and_linear_in_fiber() {
    for seed in 0..4 {
        let lifted = lift_connection(&random_connection(seed, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 40);
        let p = rational_point(&mut rng, 4);
        let t = lifted.christoffel(&p, 3).unwrap();
        assert!(is_symmetric(&t, 0.0));
        for comp in t.iter().flatten().flatten() {
            for a in 2..4 {
                for b in 2..4 {
                    assert!(comp.partial(a).unwrap().partial(b).unwrap().is_zero());
                }
            }
        }
    }
}

#[test]
fn pullback_examples() {
    let flat: ConnectionRef<Q> = Arc::new(FlatConnection { dim: 2 });
    let affine: MapRef<Q> = catalog_get("affine", &json!({"a": [[2, 1], [0, 1]], "b": [1, -1]}), 2).unwrap();
    let t = pullback_connection(&affine, &flat).unwrap().christoffel(&[q(1, 2), q(2, 3)], 3).unwrap();
    assert!(table_is_zero(&t));

    // x + x³: 6x / (1 + 3x²)
    let flat1: ConnectionRef<Q> = Arc::new(FlatConnection { dim: 1 });
    let f: MapRef<Q> = catalog_get("polynomial_perturbation", &json!({"eps": 1}), 1).unwrap();
    let pulled = pullback_connection(&f, &flat1).unwrap();
    for x in [q(0, 1), q(1, 2), q(-2, 3)] {
        let xv = Jet::variable(1, 3, 0, x.clone());
        let expected = xv.scale(&q(6, 1)).div(&(&xv * &xv).scale(&q(3, 1)).add_constant(&q(1, 1))).unwrap();
        assert_eq!(pulled.christoffel(&[x], 3).unwrap()[0][0][0], expected);
    }
}

#[test]
fn pullback_is_contravariant() {
    for dim in [1, 2] {
        let gamma = random_connection(9 + dim as u64, dim);
        let cases = exact_cases(70 + dim as u64, dim);
        for pair in cases.windows(2) {
            let (f, _) = &pair[0];
            let (h, x) = &pair[1];
            if ensure_regular(f.as_ref(), &h.apply(x).unwrap()).is_err() {
                continue;
            }
            let fh = compose(f, h).unwrap();
            let lhs = pullback_connection(&fh, &gamma).unwrap().christoffel(x, 2).unwrap();
            let fg = pullback_connection(f, &gamma).unwrap();
            let rhs = pullback_connection(h, &fg).unwrap().christoffel(x, 2).unwrap();
            assert_eq!(lhs, rhs, "{} ∘ {}", f.label(), h.label());
        }
    }
}

#[test]
fn cocycle_c_flat_examples() {
    let flat: ConnectionRef<Q> = Arc::new(FlatConnection { dim: 2 });
    let affine: MapRef<Q> = catalog_get("affine", &json!({"a": 3, "b": 1}), 1).unwrap();
    let c = cocycle_c(&cotangent_lift(&affine), &flat).unwrap();
    assert!(table_is_zero(&c.components(&[q(1, 2), q(5, 1)], 2).unwrap()));

    // C^{1̄}_{11} = ξ (3 f''²/f'² - f'''/f') for f = x + x³
    let f: MapRef<Q> = catalog_get("polynomial_perturbation", &json!({"eps": 1}), 1).unwrap();
    let c = cocycle_c(&cotangent_lift(&f), &flat).unwrap();
    for (x, xi) in [(q(0, 1), q(1, 1)), (q(0, 1), q(-2, 3)), (q(1, 2), q(3, 1)), (q(-1, 3), q(1, 5))] {
        let t = c.components(&[x.clone(), xi.clone()], 0).unwrap();
        let d1 = q(1, 1) + q(3, 1) * x.clone() * x.clone();
        let d2 = q(6, 1) * x.clone();
        let d3 = q(6, 1);
        let expected = xi.clone() * (q(3, 1) * d2.clone() * d2 / (d1.clone() * d1.clone()) - d3 / d1);
        assert_eq!(t[1][0][0].value(), expected);
        if x == q(0, 1) {
            assert_eq!(t[1][0][0].value(), q(-6, 1) * xi);
        }
    }
}

#[test]
fn cocycle_c_twisted_additivity() {
    for dim in [1, 2] {
        let base = random_connection(3 + dim as u64, dim);
        let gamma = lift_connection(&base);
        let cases = exact_cases(200 + dim as u64, dim);
        let mut rng = ChaCha8Rng::seed_from_u64(dim as u64);
        for pair in cases.windows(2) {
            let (f, _) = &pair[0];
            let (h, x) = &pair[1];
            if ensure_regular(f.as_ref(), &h.apply(x).unwrap()).is_err() {
                continue;
            }
            let (lf, lh) = (cotangent_lift(f), cotangent_lift(h));
            let mut p = x.clone();
            p.extend(rational_point(&mut rng, dim));
            let lfh = compose(&lf, &lh).unwrap();
            let c_fh = cocycle_c(&lfh, &gamma).unwrap().components(&p, 1).unwrap();
            let c_f = cocycle_c(&lf, &gamma).unwrap();
            let pulled = tensor_pullback(&lh, &c_f).components(&p, 1).unwrap();
            let c_h = cocycle_c(&lh, &gamma).unwrap().components(&p, 1).unwrap();
            let resid = table_sub(&c_fh, &table_add(&pulled, &c_h));
            assert!(table_is_zero(&resid), "{} ∘ {}", f.label(), h.label());
            assert!(is_symmetric(&c_fh, 0.0));
        }
    }
}

#[test]
fn tensor_pullback_matches_matrix_transform() {
    // order-0 components recomputed with plain matrices
    let base = random_connection(17, 2);
    let gamma = lift_connection(&base);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (g, _) in exact_cases(18, 2).into_iter().take(5) {
        let tensor = cocycle_c(&cotangent_lift(&g), &gamma).unwrap();
        for (h, y) in exact_cases(19, 2).into_iter().skip(2).take(3) {
            let lh = cotangent_lift(&h);
            let mut p = y.clone();
            p.extend(rational_point(&mut rng, 2));
            let hp = lh.apply(&p).unwrap();
            if ensure_regular(cotangent_lift(&g).as_ref(), &hp).is_err() {
                continue;
            }
            let t = tensor.components(&hp, 0).unwrap();
            let j = jacobian_values(&lh.jets(&p, 1).unwrap());
            let ji = inverse(&j).unwrap();
            let got = tensor_pullback(&lh, &tensor).components(&p, 0).unwrap();
            for k in 0..4 {
                for i in 0..4 {
                    for jj in 0..4 {
                        let mut acc = q(0, 1);
                        for c in 0..4 {
                            for a in 0..4 {
                                for b in 0..4 {
                                    acc += ji[k][c].clone() * t[c][a][b].value() * j[a][i].clone() * j[b][jj].clone();
                                }
                            }
                        }
                        assert_eq!(got[k][i][jj].value(), acc);
                    }
                }
            }
        }
    }
}

/// Second code path: the recursion expanded into partial derivatives.
fn expanded_third(q: &Jet<Q>, g: &[Vec<Vec<Jet<Q>>>], c: usize, b: usize, a: usize) -> Q {
    let d = q.dim();
    let der = |axes: &[usize]| {
        let mut e = vec![0u8; d];
        for &x in axes {
            e[x] += 1;
        }
        q.derivative(&e).unwrap()
    };
    let gv = |k: usize, i: usize, j: usize| g[k][i][j].value();
    let dg = |m: usize, k: usize, i: usize, j: usize| {
        let mut e = vec![0u8; d];
        e[m] = 1;
        g[k][i][j].coeff(&e)
    };
    let mut v = der(&[c, b, a]);
    for e in 0..d {
        v = v - dg(c, e, b, a) * der(&[e]) - gv(e, b, a) * der(&[c, e]);
        v = v - gv(e, c, b) * der(&[e, a]) - gv(e, c, a) * der(&[b, e]);
        for f in 0..d {
            v = v + gv(e, c, b) * gv(f, e, a) * der(&[f]) + gv(e, c, a) * gv(f, b, e) * der(&[f]);
        }
    }
    v
}

#[test]
fn covariant_derivatives_against_expansion() {
    let lifted = lift_connection(&gamma_x());
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..5 {
        let p = rational_point(&mut rng, 2);
        let qf = Poly::<Q>::random(&mut rng, 2, 4, 0.7);
        let jet = qf.jet_at(&p, 3).unwrap();
        let g = lifted.christoffel(&p, 1).unwrap();
        let cov = covariant_derivs(&jet, &g).unwrap();
        for c in 0..2 {
            for b in 0..2 {
                for a in 0..2 {
                    assert_eq!(cov.third[c][b][a], expanded_third(&jet, &g, c, b, a));
                }
            }
        }
    }
}

#[test]
fn flat_covariant_is_partial() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = rational_point(&mut rng, 3);
    let qf = Poly::<Q>::random(&mut rng, 3, 4, 0.7);
    let jet = qf.jet_at(&p, 3).unwrap();
    let g = FlatConnection { dim: 3 }.christoffel(&p, 1).unwrap();
    let cov = covariant_derivs(&jet, &g).unwrap();
    assert_eq!(cov.third[0][1][2], jet.derivative(&[1, 1, 1]).unwrap());
    assert_eq!(cov.second[2][2], jet.derivative(&[0, 0, 2]).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn second_covariant_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = lift_connection(&(Arc::new(PolyConnection::<Q>::random(&mut rng, 2, 2, 0.5)) as ConnectionRef<Q>));
        let p = rational_point(&mut rng, 4);
        let jet = Poly::<Q>::random(&mut rng, 4, 3, 0.5).jet_at(&p, 3).unwrap();
        let cov = covariant_derivs(&jet, &gamma.christoffel(&p, 1).unwrap()).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                prop_assert_eq!(&cov.second[a][b], &cov.second[b][a]);
            }
        }
    }

    #[test]
    fn cocycle_c_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: ConnectionRef<Q> = Arc::new(PolyConnection::random(&mut rng, 1, 2, 0.6));
        let f: MapRef<Q> = Arc::new(jetcocycle::maps::PolyMap::random_near_identity(&mut rng, 1, 3));
        let p = rational_point(&mut rng, 2);
        prop_assume!(ensure_regular(f.as_ref(), &p[..1]).is_ok());
        let c = cocycle_c(&cotangent_lift(&f), &lift_connection(&base)).unwrap().components(&p, 1).unwrap();
        prop_assert!(is_symmetric(&c, 0.0));
    }
}

#[test]
fn exact_values_have_no_rounding() {
    // sanity: the pullback along a rational map stays rational
    let f: MapRef<Q> = catalog_get("moebius", &json!({"a": 1, "b": 0, "c": 1, "d": 1}), 1).unwrap();
    let flat: ConnectionRef<Q> = Arc::new(FlatConnection { dim: 1 });
    let t = pullback_connection(&f, &flat).unwrap().christoffel(&[q(1, 1)], 0).unwrap();
    // f''/f' = -2/(x+1)
    assert_eq!(t[0][0][0].value(), Q::from_i64(-1));
}
