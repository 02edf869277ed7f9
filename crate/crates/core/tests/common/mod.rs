#![allow(dead_code)]

use jetcocycle::maps::{catalog_get, catalog_listing, ensure_regular, sample_params, MapRef};
use jetcocycle::numkernel::poly::small_rational;
use jetcocycle::numkernel::{Rational, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Q = Rational;

pub fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

pub fn rational_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Q> {
    (0..dim).map(|_| small_rational::<Q, _>(rng) / Q::from_i64(3)).collect()
}

/// Exact catalog members with random parameters, each with a regular
/// sample point.
pub fn exact_cases(seed: u64, dim: usize) -> Vec<(MapRef<Q>, Vec<Q>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for info in catalog_listing().into_iter().filter(|i| i.exact) {
        if info.name == "moebius" && dim != 1 {
            continue;
        }
        let params = sample_params(&mut rng, info.name, dim).unwrap();
        let f = catalog_get::<Q>(info.name, &params, dim).unwrap();
        let p = loop {
            let p = rational_point(&mut rng, dim);
            if ensure_regular(f.as_ref(), &p).is_ok() {
                break p;
            }
        };
        out.push((f, p));
    }
    out
}

/// Every catalog member on the float backend, each with a sample point
/// where it preserves orientation.
pub fn float_cases(seed: u64, dim: usize) -> Vec<(MapRef<f64>, Vec<f64>)> {
    use jetcocycle::maps::jacobian_at;
    use jetcocycle::numkernel::linalg::determinant;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for info in catalog_listing() {
        if info.name == "moebius" && dim != 1 {
            continue;
        }
        let params = sample_params(&mut rng, info.name, dim).unwrap();
        let f = catalog_get::<f64>(info.name, &params, dim).unwrap();
        let p = loop {
            let p: Vec<f64> = rational_point(&mut rng, dim).iter().map(Scalar::to_f64).collect();
            if jacobian_at(f.as_ref(), &p).map(|j| determinant(&j) > 1e-3).unwrap_or(false) {
                break p;
            }
        };
        out.push((f, p));
    }
    out
}
