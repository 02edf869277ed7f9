use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::Suite;
use crate::cocycles::{
    bracket_antisymmetry_residual, chevalley_eilenberg_residual, consistency_case, group_discrepancy, jacobi_residual,
    log_volume_cocycle, moyal_p3, point_strings, schwarzian_1d, vect_embedding_cocycle, AlgebraCocycle, Arrangement,
    ConnectionCocycle, ConsistencyPair, DeRham, Discrepancy, Divergence, GroupCocycle, LieDerivativeConnection,
    LiftedConnectionCocycle, LogVolume, OperatorCocycle, Schwarzian, Value, Vey,
};
use crate::error::{Error, Result};
use crate::geometry::{cocycle_c, lift_connection, table_is_zero, table_max_abs, ConnectionRef, FlatConnection, PolyConnection, Table21};
use crate::maps::{catalog_get, cotangent_lift, jacobian_at, MapRef, PolyVectorField, VectorField, VectorFieldRef};
use crate::numkernel::linalg::determinant;
use crate::numkernel::poly::small_rational;
use crate::numkernel::{Poly, Scalar};
use crate::operators::{apply_op_to_symbol, build_l_coordinate, build_l_covariant, build_l_flat, flat_triangle_factor, FiberOperator, Symbol, FIBER_DEGREE};

const MAX_DRAWS: usize = 64;
const AFFINE_NAMES: [&str; 4] = ["identity", "translation", "linear", "affine"];
const CONSISTENCY_T: f64 = 1e-3;
const LOG_VOLUME_TOL: f64 = 1e-9;

type Outcome = Result<(f64, bool)>;

pub(crate) struct Case {
    pub suite: Suite,
    pub case_id: String,
    pub maps: Vec<String>,
    pub point: Vec<String>,
    pub run: Box<dyn Fn() -> Outcome + Send + Sync>,
}

pub(crate) struct NamedMap<S: Scalar> {
    pub name: String,
    pub params: serde_json::Value,
    pub map: MapRef<S>,
}

pub(crate) struct Ctx<'a, S: Scalar> {
    pub dim: usize,
    pub order: usize,
    pub tol: f64,
    pub samples: usize,
    pub maps: &'a [NamedMap<S>],
    pub rng: ChaCha8Rng,
}

fn sample_box<S: Scalar>(rng: &mut ChaCha8Rng, dim: usize) -> Vec<S> {
    (0..dim)
        .map(|_| {
            if S::EXACT {
                S::from_ratio(rng.gen_range(-24..=24), 24)
            } else {
                S::from_f64(rng.gen_range(-1.0..=1.0)).expect("finite draw")
            }
        })
        .collect()
}

fn sample_where<S: Scalar>(rng: &mut ChaCha8Rng, dim: usize, ok: impl Fn(&[S]) -> bool) -> Result<Vec<S>> {
    for _ in 0..MAX_DRAWS {
        let p = sample_box(rng, dim);
        if ok(&p) {
            return Ok(p);
        }
    }
    Err(Error::Domain(format!("no admissible sample point after {MAX_DRAWS} draws")))
}

fn det_ok<S: Scalar>(f: &MapRef<S>, x: &[S], positive: bool) -> bool {
    match jacobian_at(f.as_ref(), x) {
        Ok(j) => {
            let d = determinant(&j);
            d.magnitude() > 1e-6 && (!positive || d.is_positive())
        }
        Err(_) => false,
    }
}

fn pair_ok<S: Scalar>(f: &MapRef<S>, h: &MapRef<S>, x: &[S], positive: bool) -> bool {
    det_ok(h, x, positive) && h.apply(x).map(|hx| det_ok(f, &hx, positive)).unwrap_or(false)
}

fn pairs<T>(items: &[T]) -> Vec<(&T, &T)> {
    let m = items.len();
    let mut steps = vec![1, 3];
    steps.dedup_by_key(|s| *s % m.max(1));
    let mut out = Vec::new();
    for step in steps {
        for i in 0..m {
            out.push((&items[i], &items[(i + step) % m]));
        }
    }
    out
}

fn verdict<S: Scalar>(exact_zero: bool, residual: f64, scale: f64, tol: f64) -> (f64, bool) {
    let d = Discrepancy { exact_zero, abs: residual, scale };
    (residual, d.passes(S::EXACT, tol))
}

struct Builder {
    suite: Suite,
    cases: Vec<Case>,
}

impl Builder {
    fn new(suite: Suite) -> Self {
        Builder { suite, cases: Vec::new() }
    }

    fn push<S: Scalar>(
        &mut self,
        id: String,
        maps: Vec<String>,
        point: &Result<Vec<S>>,
        run: impl Fn(&[S]) -> Outcome + Send + Sync + 'static,
    ) {
        let (point_text, run): (Vec<String>, Box<dyn Fn() -> Outcome + Send + Sync>) = match point {
            Ok(p) => {
                let p = p.clone();
                (point_strings(&p), Box::new(move || run(&p)))
            }
            Err(e) => {
                let e = e.clone();
                (Vec::new(), Box::new(move || Err(e.clone())))
            }
        };
        self.cases.push(Case { suite: self.suite, case_id: id, maps, point: point_text, run });
    }
}

fn with_fiber<S: Scalar>(rng: &mut ChaCha8Rng, base: Result<Vec<S>>) -> Result<Vec<S>> {
    let x = base?;
    let mut p = x.clone();
    p.extend(sample_box::<S>(rng, x.len()));
    Ok(p)
}

fn random_connection<S: Scalar>(rng: &mut ChaCha8Rng, dim: usize) -> ConnectionRef<S> {
    Arc::new(PolyConnection::random(rng, dim, 2, 0.5))
}

fn group_case<S: Scalar, C: GroupCocycle<S> + 'static>(c: Arc<C>, f: &MapRef<S>, h: &MapRef<S>, tol: f64) -> impl Fn(&[S]) -> Outcome {
    let (f, h) = (f.clone(), h.clone());
    move |p: &[S]| {
        let d = group_discrepancy(c.as_ref(), &f, &h, p, Arrangement::Declared)?;
        Ok((d.abs, d.passes(S::EXACT, tol)))
    }
}

/// Runs one group cocycle over every configured pair and sample point.
fn group_suite<S: Scalar, C: GroupCocycle<S> + 'static>(
    b: &mut Builder,
    ctx: &mut Ctx<S>,
    maps: &[NamedMap<S>],
    tag: &str,
    make: impl Fn(&mut ChaCha8Rng) -> C,
    positive: bool,
    tol: f64,
) {
    for (pi, (f, h)) in pairs(maps).into_iter().enumerate() {
        let c = Arc::new(make(&mut ctx.rng));
        let on_cotangent = c.on_cotangent();
        for s in 0..ctx.samples {
            let base = sample_where(&mut ctx.rng, ctx.dim, |x| pair_ok(&f.map, &h.map, x, positive));
            let point = if on_cotangent { with_fiber(&mut ctx.rng, base) } else { base };
            b.push(
                format!("{tag}/pair{pi}/p{s}"),
                vec![f.map.label(), h.map.label()],
                &point,
                group_case(c.clone(), &f.map, &h.map, tol),
            );
        }
    }
}

pub(crate) fn build<S: Scalar>(suite: Suite, ctx: &mut Ctx<S>) -> Vec<Case> {
    let mut b = Builder::new(suite);
    match suite {
        Suite::Lift => lift(&mut b, ctx),
        Suite::CocycleC => cocycle_c_suite(&mut b, ctx),
        Suite::OperatorL => operator_l(&mut b, ctx),
        Suite::DegreeLowering => degree_lowering(&mut b, ctx),
        Suite::ClassicalCocycles => classical(&mut b, ctx),
        Suite::AlgebraCocycles => algebra(&mut b, ctx),
        Suite::Moyal => moyal(&mut b, ctx),
        Suite::Consistency => consistency(&mut b, ctx),
    }
    b.cases
}

fn table_pairs_residual<S: Scalar>(pairs: impl Iterator<Item = (S, S)>) -> (bool, f64, f64) {
    let mut exact = true;
    let (mut res, mut scale) = (0f64, 0f64);
    for (a, b) in pairs {
        exact &= a == b;
        res = res.max((a.clone() - b.clone()).magnitude());
        scale = scale.max(a.magnitude()).max(b.magnitude());
    }
    (exact, res, scale)
}

fn jet_coeffs<S: Scalar>(t: &Table21<S>, k: usize, i: usize, j: usize) -> Vec<S> {
    t[k][i][j].coeffs().to_vec()
}

fn lift<S: Scalar>(b: &mut Builder, ctx: &mut Ctx<S>) {
    let n = ctx.dim;
    let order = ctx.order - 1;
    let tol = ctx.tol;
    for s in 0..ctx.samples {
        let gamma = lift_connection(&random_connection::<S>(&mut ctx.rng, n));
        let point: Result<Vec<S>> = Ok(sample_box(&mut ctx.rng, 2 * n));
        let g = gamma.clone();
        b.push(format!("symmetric/p{s}"), vec!["random_connection".into()], &point, move |p| {
            let t = g.christoffel(p, order)?;
            let d = t.len();
            let pairs = (0..d).flat_map(|k| (0..d).flat_map(move |i| (0..d).map(move |j| (k, i, j))));
            let (exact, res, scale) = table_pairs_residual(
                pairs.flat_map(|(k, i, j)| jet_coeffs(&t, k, i, j).into_iter().zip(jet_coeffs(&t, k, j, i))),
            );
            Ok(verdict::<S>(exact, res, scale, tol))
        });
        let g = gamma.clone();
        b.push(format!("fiber_linear/p{s}"), vec!["random_connection".into()], &point, move |p| {
            let t = g.christoffel(p, order)?;
            let mut high = Vec::new();
            for k in n..2 * n {
                for i in 0..n {
                    for j in 0..n {
                        for (e, c) in t[k][i][j].terms() {
                            if e[n..].iter().map(|&v| v as usize).sum::<usize>() >= 2 {
                                high.push(c.clone());
                            }
                        }
                    }
                }
            }
            let (exact, res, _) = table_pairs_residual(high.into_iter().map(|c| (c, S::zero())));
            Ok(verdict::<S>(exact, res, 1.0, tol))
        });
        let flat = lift_connection::<S>(&(Arc::new(FlatConnection { dim: n }) as ConnectionRef<S>));
        b.push(format!("flat/p{s}"), vec!["flat".into()], &point, move |p| {
            let t = flat.christoffel(p, order)?;
            Ok(verdict::<S>(table_is_zero(&t), table_max_abs(&t), 1.0, tol))
        });
        if n == 1 {
            let gx: ConnectionRef<S> = Arc::new(PolyConnection::new(vec![vec![vec![Poly::var(1, 0)]]]).expect("symmetric"));
            let lifted = lift_connection(&gx);
            b.push(format!("gamma_x/p{s}"), vec!["gamma=x".into()], &point, move |p| {
                let t = lifted.christoffel(p, 0)?;
                let (x, xi) = (p[0].clone(), p[1].clone());
                let want_a = xi * (S::from_i64(2) * x.clone() * x.clone() - S::one());
                let want_b = -x;
                let (exact, res, scale) =
                    table_pairs_residual([(t[1][0][0].value(), want_a), (t[1][0][1].value(), want_b)].into_iter());
                Ok(verdict::<S>(exact, res, scale, tol))
            });
        }
    }
}

fn cocycle_c_suite<S: Scalar>(b: &mut Builder, ctx: &mut Ctx<S>) {
    let (n, tol, order) = (ctx.dim, ctx.tol, ctx.order - 2);
    let maps = ctx.maps;
    group_suite(b, ctx, maps, "twisted", |rng| LiftedConnectionCocycle { gamma: random_connection(rng, n) }, false, tol);
    let flat: ConnectionRef<S> = Arc::new(FlatConnection { dim: n });
    for m in maps.iter().filter(|m| AFFINE_NAMES.contains(&m.name.as_str())) {
        for s in 0..ctx.samples {
            let base = Ok(sample_box::<S>(&mut ctx.rng, n));
            let point = with_fiber(&mut ctx.rng, base);
            let (f, g) = (m.map.clone(), lift_connection(&flat));
            b.push(format!("affine_zero/{}/p{s}", m.name), vec![m.map.label()], &point, move |p| {
                let t = cocycle_c(&cotangent_lift(&f), &g)?.components(p, order)?;
                Ok(verdict::<S>(table_is_zero(&t), table_max_abs(&t), 1.0, tol))
            });
        }
    }
}

fn operator_l<S: Scalar>(b: &mut Builder, ctx: &mut Ctx<S>) {
    let (n, tol) = (ctx.dim, ctx.tol);
    let maps = ctx.maps;
    group_suite(b, ctx, maps, "cocycle", |rng| OperatorCocycle { gamma: random_connection(rng, n) }, false, tol);
    let flat: ConnectionRef<S> = Arc::new(FlatConnection { dim: n });
    for m in maps {
        for s in 0..ctx.samples {
            let base = sample_where(&mut ctx.rng, n, |x| det_ok(&m.map, x, false));
            let point = with_fiber(&mut ctx.rng, base);
            let (f, g) = (m.map.clone(), flat.clone());
            b.push(format!("triangle/{}/p{s}", m.name), vec![m.map.label()], &point, move |p| {
                let lambda = flat_triangle_factor::<S>();
                let cov = build_l_covariant(&f, &g, p)?;
                let coord = build_l_coordinate(&f, &g, p)?;
                let expl = build_l_flat(&f, p)?;
                let d1 = cov.checked_sub(&coord.scale(&lambda))?;
                let d2 = coord.checked_sub(&expl)?;
                let scale = cov.max_abs().max(coord.max_abs()).max(expl.max_abs());
                Ok(verdict::<S>(d1.is_zero() && d2.is_zero(), d1.max_abs().max(d2.max_abs()), scale, tol))
            });
        }
    }
}

/// Largest coefficient of the part of `out` above fiber degree `bound`.
fn excess_degree<S: Scalar>(out: &Symbol<S>, bound: usize, tol: f64) -> (f64, bool) {
    let mut exact = true;
    let mut res = 0f64;
    let mut scale = 0f64;
    for (mu, c) in out.terms() {
        let m = c.terms().map(|(_, v)| v.magnitude()).fold(0.0, f64::max);
        scale = scale.max(m);
        if mu.iter().map(|&v| v as usize).sum::<usize>() > bound {
            exact = false;
            res = res.max(m);
        }
    }
    verdict::<S>(exact, res, scale, tol)
}

fn degree_lowering<S: Scalar>(b: &mut Builder, ctx: &mut Ctx<S>) {
    let (n, tol) = (ctx.dim, ctx.tol);
    for m in ctx.maps {
        let gamma = random_connection::<S>(&mut ctx.rng, n);
        for s in 0..ctx.samples {
            let point = sample_where(&mut ctx.rng, n, |x| det_ok(&m.map, x, false));
            let symbols: Vec<Symbol<S>> = (2..=5).map(|k| Symbol::random(&mut ctx.rng, n, k, 1)).collect();
            let (f, g) = (m.map.clone(), gamma.clone());
            b.push(format!("{}/p{s}/k2-5", m.name), vec![m.map.label()], &point, move |x| {
                let op = FiberOperator::sample(|pt| build_l_covariant(&f, &g, pt), x, FIBER_DEGREE)?;
                let (mut worst, mut ok) = (0.0, true);
                for (k, p) in (2..).zip(&symbols) {
                    let out = op.apply_to_symbol(p)?;
                    let (r, pass) = excess_degree(&out, k - 2, tol);
                    worst = f64::max(worst, r);
                    ok &= pass;
                }
                Ok((worst, ok))
            });
        }
    }
    if n == 1 {
        let f: MapRef<S> = catalog_get("polynomial_perturbation", &json!({"eps": 1}), 1).expect("catalog entry");
        b.push("worked_cubic".into(), vec![f.label()], &Ok(vec![S::zero()]), move |x| {
            let xi3 = Symbol::from_poly(1, &Poly::var(2, 1).pow(3))?;
            let out = apply_op_to_symbol(|pt| build_l_flat(&f, pt), &xi3, x)?;
            let mut want = Symbol::zero(1);
            want.add_term(&[1], Poly::constant(1, S::from_i64(-36)))?;
            let d = Discrepancy::between(&Value::Symbol(out), &Value::Symbol(want), &[])?;
            Ok((d.abs, d.passes(S::EXACT, tol)))
        });
    }
}

fn classical<S: Scalar>(b: &mut Builder, ctx: &mut Ctx<S>) {
    let (n, tol) = (ctx.dim, ctx.tol);
    let maps = ctx.maps;
    group_suite(b, ctx, maps, "connection", |rng| ConnectionCocycle { gamma: random_connection(rng, n) }, false, tol);
    group_suite(b, ctx, maps, "derham", |rng| DeRham { potential: Poly::random(rng, n, 3, 0.7) }, false, tol);
    if n == 1 {
        group_suite(b, ctx, maps, "schwarzian", |_| Schwarzian, false, tol);
        for m in maps.iter().filter(|m| m.name == "moebius") {
            for s in 0..ctx.samples {
                let point = sample_where(&mut ctx.rng, 1, |x| det_ok(&m.map, x, false));
                let f = m.map.clone();
                b.push(format!("schwarzian_moebius/p{s}"), vec![f.label()], &point, move |x| {
                    let v = schwarzian_1d(&f, x)?;
                    Ok(verdict::<S>(v.is_zero(), v.magnitude(), 1.0, tol))
                });
            }
        }
    }

    // log det is transcendental, so this family always runs in floating point
    let floats: Vec<NamedMap<f64>> = maps
        .iter()
        .filter_map(|m| {
            let map = catalog_get::<f64>(&m.name, &m.params, n).ok()?;
            (map.orientation_preserving() != Some(false)).then_some(())?;
            Some(NamedMap { name: m.name.clone(), params: m.params.clone(), map })
        })
        .collect();
    let mut fctx = Ctx { dim: n, order: ctx.order, tol, samples: ctx.samples, maps: &floats, rng: ctx.rng.clone() };
    let log_tol = if S::EXACT { LOG_VOLUME_TOL } else { tol.min(LOG_VOLUME_TOL) };
    group_suite(b, &mut fctx, &floats, "log_volume", |_| LogVolume, true, log_tol);
    ctx.rng = fctx.rng;

    let mut shear = vec![vec![json!(0); n]; n];
    for (i, row) in shear.iter_mut().enumerate() {
        row[i] = json!(1);
        if i + 1 < n {
            row[i + 1] = json!("1/2");
        }
    }
    let f: MapRef<S> = catalog_get("linear", &json!({ "a": shear }), n).expect("unimodular matrix");
    for s in 0..ctx.samples {
        let point: Result<Vec<S>> = Ok(sample_box(&mut ctx.rng, n));
        let f = f.clone();
        b.push(format!("log_volume_unimodular/p{s}"), vec![f.label()], &point, move |x| {
            let v = log_volume_cocycle(&f, x)?;
            Ok(verdict::<S>(v.is_zero(), v.magnitude(), 1.0, tol))
        });
    }
}

fn random_field<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> VectorFieldRef<S> {
    Arc::new(PolyVectorField::random(rng, n, 3))
}

fn algebra_case<S: Scalar, C: AlgebraCocycle<S> + 'static>(
    c: C,
    x: VectorFieldRef<S>,
    y: VectorFieldRef<S>,
    tol: f64,
) -> impl Fn(&[S]) -> Outcome {
    move |p: &[S]| {
        let d = c.discrepancy(&x, &y, p)?;
        Ok((d.abs, d.passes(S::EXACT, tol)))
    }
}

fn algebra<S: Scalar>(b: &mut Builder, ctx: &mut Ctx<S>) {
    let (n, tol) = (ctx.dim, ctx.tol);
    for s in 0..2 * ctx.samples.max(5) {
        let x = random_field::<S>(&mut ctx.rng, n);
        let y = random_field::<S>(&mut ctx.rng, n);
        let z = random_field::<S>(&mut ctx.rng, n);
        let labels = vec![x.label(), y.label()];
        let point: Result<Vec<S>> = Ok(sample_box(&mut ctx.rng, n));
        let div = Divergence { a: small_rational(&mut ctx.rng), potential: Some(Poly::random(&mut ctx.rng, n, 3, 0.7)) };
        b.push(format!("divergence/{s}"), labels.clone(), &point, algebra_case(div, x.clone(), y.clone(), tol));
        let lie = LieDerivativeConnection { gamma: random_connection(&mut ctx.rng, n) };
        b.push(format!("lie_connection/{s}"), labels.clone(), &point, algebra_case(lie, x.clone(), y.clone(), tol));
        b.push(format!("bracket/{s}"), labels, &point, move |p| {
            let mut jets = bracket_antisymmetry_residual(&x, &y, p, 2)?;
            jets.extend(jacobi_residual(&x, &y, &z, p, 2)?);
            let coeffs = jets.iter().flat_map(|j| j.coeffs().to_vec());
            let (exact, res, _) = table_pairs_residual(coeffs.map(|c| (c, S::zero())));
            Ok(verdict::<S>(exact, res, 1.0, tol))
        });
    }
}

const CE_DEGREES: [[usize; 3]; 6] = [[2, 2, 2], [3, 2, 1], [4, 1, 1], [3, 3, 0], [2, 3, 1], [1, 1, 4]];

fn moyal<S: Scalar>(b: &mut Builder, ctx: &mut Ctx<S>) {
    let (n, tol) = (ctx.dim, ctx.tol);
    let d = 2 * n;
    let origin: Result<Vec<S>> = Ok(sample_box(&mut ctx.rng, d));
    b.push("worked_xi3_x3".into(), vec!["xi^3".into(), "x^3".into()], &origin, move |p| {
        let v = moyal_p3(&Poly::var(d, n).pow(3), &Poly::var(d, 0).pow(3), p)?;
        let want = S::from_i64(-36);
        Ok(verdict::<S>(v == want, (v - want).magnitude(), 36.0, tol))
    });
    for s in 0..ctx.samples {
        let point: Result<Vec<S>> = Ok(sample_box(&mut ctx.rng, d));
        let f = Poly::<S>::random(&mut ctx.rng, d, 4, 0.5);
        let g = Poly::<S>::random(&mut ctx.rng, d, 4, 0.5);
        b.push(format!("antisymmetry/{s}"), vec!["random".into(), "random".into()], &point, move |p| {
            let a = moyal_p3(&f, &g, p)?;
            let r = moyal_p3(&g, &f, p)?;
            let sum = a.clone() + r.clone();
            Ok(verdict::<S>(sum.is_zero(), sum.magnitude(), a.magnitude(), tol))
        });
        let degs = CE_DEGREES[s % CE_DEGREES.len()];
        let polys: Vec<Poly<S>> = degs.iter().map(|&k| Poly::random(&mut ctx.rng, d, k, 0.7)).collect();
        b.push(format!("chevalley_eilenberg/{s}"), vec![format!("degrees {degs:?}")], &point, move |p| {
            let r = chevalley_eilenberg_residual(&polys[0], &polys[1], &polys[2], p)?;
            Ok(verdict::<S>(r.is_zero(), r.magnitude(), 1.0, tol))
        });
        let x = Arc::new(PolyVectorField::<S>::random(&mut ctx.rng, n, 4));
        let base: Result<Vec<S>> = Ok(sample_box(&mut ctx.rng, n));
        for k in 2..=5usize {
            let sym = Symbol::random(&mut ctx.rng, n, k, 2);
            let x = x.clone();
            b.push(format!("vey_degree/{s}/k{k}"), vec![x.label()], &base, move |at| {
                let out = vect_embedding_cocycle(x.as_ref(), &sym, at)?;
                Ok(excess_degree(&out, k - 2, tol))
            });
        }
        let (vx, vy) = (random_field::<S>(&mut ctx.rng, n), random_field::<S>(&mut ctx.rng, n));
        let vey = Vey { probe: Arc::new(Poly::<S>::random(&mut ctx.rng, d, 4, 0.5)) };
        b.push(format!("vey_cocycle/{s}"), vec![vx.label(), vy.label()], &point, algebra_case(vey, vx, vy, tol));
    }
}

fn consistency<S: Scalar>(b: &mut Builder, ctx: &mut Ctx<S>) {
    let n = ctx.dim;
    let euler: VectorFieldRef<f64> =
        Arc::new(PolyVectorField::new((0..n).map(|i| Poly::var(n, i)).collect()).expect("matching dimensions"));
    let squares: VectorFieldRef<f64> =
        Arc::new(PolyVectorField::new((0..n).map(|i| Poly::var(n, i).pow(2)).collect()).expect("matching dimensions"));
    for s in 0..ctx.samples {
        let point: Result<Vec<f64>> = Ok(sample_box(&mut ctx.rng, n));
        let random: VectorFieldRef<f64> = Arc::new(PolyVectorField::random(&mut ctx.rng, n, 2));
        let gamma = random_connection::<f64>(&mut ctx.rng, n);
        let flat: ConnectionRef<f64> = Arc::new(FlatConnection { dim: n });
        let runs: [(&str, VectorFieldRef<f64>, ConsistencyPair); 4] = [
            ("log_volume_euler", euler.clone(), ConsistencyPair::LogVolume),
            ("log_volume_squares", squares.clone(), ConsistencyPair::LogVolume),
            ("connection_flat", random.clone(), ConsistencyPair::Connection(flat)),
            ("connection_random", random, ConsistencyPair::Connection(gamma)),
        ];
        for (tag, field, pair) in runs {
            b.push(format!("{tag}/p{s}"), vec![field.label()], &point, move |x| {
                consistency_case(&pair, &field, CONSISTENCY_T, x)
            });
        }
    }
}
