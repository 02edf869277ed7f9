//! Builtin maps addressable by name from the command line.

use std::fmt;

use rand::Rng;
use serde_json::{json, Value};

use super::{ensure_regular, DiffeoMap, MapRef};
use crate::error::{Error, Result};
use crate::numkernel::linalg::{determinant, inverse, mat_vec, Matrix};
use crate::numkernel::poly::small_rational;
use crate::numkernel::{parse_scalar, Jet, Poly, Rational, Scalar};

#[derive(Debug, Clone, serde::Serialize)]
pub struct CatalogInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub singular_locus: &'static str,
    pub exact: bool,
}

pub fn catalog_listing() -> Vec<CatalogInfo> {
    vec![
        CatalogInfo { name: "identity", params: "{}", singular_locus: "none", exact: true },
        CatalogInfo {
            name: "translation",
            params: r#"{"b": [b_1, .., b_n]}"#,
            singular_locus: "none",
            exact: true,
        },
        CatalogInfo {
            name: "linear",
            params: r#"{"a": [[..], ..]} (a scalar when n = 1)"#,
            singular_locus: "everywhere when det a = 0",
            exact: true,
        },
        CatalogInfo {
            name: "affine",
            params: r#"{"a": [[..], ..], "b": [..]}"#,
            singular_locus: "everywhere when det a = 0",
            exact: true,
        },
        CatalogInfo {
            name: "polynomial_perturbation",
            params: r#"{"eps": e}: x_i + e (x_i^3 + x_{i-1}^2 x_i)"#,
            singular_locus: "1 + e (3 x_i^2 + x_{i-1}^2) = 0 for some i (empty when e >= 0)",
            exact: true,
        },
        CatalogInfo {
            name: "moebius",
            params: r#"{"a", "b", "c", "d"}: (a x + b) / (c x + d), n = 1"#,
            singular_locus: "x = -d/c",
            exact: true,
        },
        CatalogInfo {
            name: "projective",
            params: r#"{"a": [[..]], "b": [..], "c": [..], "d": d}: (a x + b) / (c.x + d)"#,
            singular_locus: "c.x + d = 0",
            exact: true,
        },
        CatalogInfo {
            name: "exp_scale",
            params: r#"{"s": s}: x_i -> exp(s x_i)"#,
            singular_locus: "none (s != 0)",
            exact: false,
        },
    ]
}

#[derive(Debug, Clone)]
enum Kind<S: Scalar> {
    Identity,
    Translation { b: Vec<S> },
    Affine { a: Matrix<S>, b: Vec<S> },
    Perturbation { eps: S },
    Moebius { a: S, b: S, c: S, d: S },
    Projective { a: Matrix<S>, b: Vec<S>, c: Vec<S>, d: S },
    ExpScale { s: S },
}

/// A named catalog member with parsed parameters.
#[derive(Clone)]
pub struct CatalogMap<S: Scalar> {
    name: &'static str,
    params: Value,
    dim: usize,
    kind: Kind<S>,
}

impl<S: Scalar> fmt::Debug for CatalogMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.params)
    }
}

impl<S: Scalar> CatalogMap<S> {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn params(&self) -> &Value {
        &self.params
    }
}

fn scalar_from_json<S: Scalar>(v: &Value) -> Option<S> {
    match v {
        Value::String(s) => parse_scalar(s),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Some(S::from_i64(i)),
            None => parse_scalar(&n.to_string()).or_else(|| n.as_f64().and_then(S::from_f64)),
        },
        _ => None,
    }
}

fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParams { name: name.to_string(), reason: reason.into() }
}

struct Params<'a> {
    name: &'a str,
    obj: &'a Value,
}

impl<'a> Params<'a> {
    fn get(&self, key: &str) -> Result<&'a Value> {
        self.obj.get(key).ok_or_else(|| invalid(self.name, format!("missing parameter `{key}`")))
    }

    fn scalar<S: Scalar>(&self, key: &str) -> Result<S> {
        scalar_from_json(self.get(key)?)
            .ok_or_else(|| invalid(self.name, format!("`{key}` is not a number")))
    }

    fn vector<S: Scalar>(&self, key: &str, dim: usize) -> Result<Vec<S>> {
        let v = self.get(key)?;
        let items: Vec<S> = match v {
            Value::Array(xs) => xs.iter().map(scalar_from_json).collect::<Option<_>>(),
            other if dim == 1 => scalar_from_json(other).map(|s| vec![s]),
            _ => None,
        }
        .ok_or_else(|| invalid(self.name, format!("`{key}` is not a vector")))?;
        if items.len() != dim {
            return Err(invalid(self.name, format!("`{key}` has length {}, expected {dim}", items.len())));
        }
        Ok(items)
    }

    fn matrix<S: Scalar>(&self, key: &str, dim: usize) -> Result<Matrix<S>> {
        let v = self.get(key)?;
        let m: Matrix<S> = match v {
            Value::Array(rows) if rows.iter().all(Value::is_array) => rows
                .iter()
                .map(|r| r.as_array().unwrap().iter().map(scalar_from_json).collect::<Option<Vec<S>>>())
                .collect::<Option<_>>(),
            other if dim == 1 => scalar_from_json(other).map(|s| vec![vec![s]]),
            _ => None,
        }
        .ok_or_else(|| invalid(self.name, format!("`{key}` is not a matrix")))?;
        if m.len() != dim || m.iter().any(|r| r.len() != dim) {
            return Err(invalid(self.name, format!("`{key}` must be {dim}x{dim}")));
        }
        Ok(m)
    }
}

/// Looks up a catalog map by name for dimension `dim`.
pub fn catalog_get<S: Scalar>(name: &str, params: &Value, dim: usize) -> Result<MapRef<S>> {
    Ok(std::sync::Arc::new(catalog_map::<S>(name, params, dim)?))
}

/// Like [`catalog_get`], and additionally requires a regular Jacobian at
/// `point`.
pub fn catalog_get_at<S: Scalar>(name: &str, params: &Value, point: &[S]) -> Result<MapRef<S>> {
    let map = catalog_get::<S>(name, params, point.len())?;
    ensure_regular(map.as_ref(), point)?;
    Ok(map)
}

pub fn catalog_map<S: Scalar>(name: &str, params: &Value, dim: usize) -> Result<CatalogMap<S>> {
    let p = Params { name, obj: params };
    if dim == 0 {
        return Err(invalid(name, "dimension must be positive"));
    }
    let (name, kind): (&'static str, Kind<S>) = match name {
        "identity" => ("identity", Kind::Identity),
        "translation" => ("translation", Kind::Translation { b: p.vector("b", dim)? }),
        "linear" | "affine" => {
            let a: Matrix<S> = p.matrix("a", dim)?;
            if determinant(&a).is_zero() {
                return Err(invalid(name, "matrix `a` is singular"));
            }
            if name == "linear" {
                ("linear", Kind::Affine { a, b: vec![S::zero(); dim] })
            } else {
                ("affine", Kind::Affine { a, b: p.vector("b", dim)? })
            }
        }
        "polynomial_perturbation" => {
            ("polynomial_perturbation", Kind::Perturbation { eps: p.scalar("eps")? })
        }
        "moebius" => {
            if dim != 1 {
                return Err(invalid(name, "moebius maps are one-dimensional"));
            }
            let (a, b, c, d): (S, S, S, S) = (p.scalar("a")?, p.scalar("b")?, p.scalar("c")?, p.scalar("d")?);
            if (a.clone() * d.clone() - b.clone() * c.clone()).is_zero() {
                return Err(invalid(name, "ad - bc = 0"));
            }
            ("moebius", Kind::Moebius { a, b, c, d })
        }
        "projective" => {
            let a: Matrix<S> = p.matrix("a", dim)?;
            let b = p.vector("b", dim)?;
            let c = p.vector("c", dim)?;
            let d: S = p.scalar("d")?;
            if determinant(&homogeneous(&a, &b, &c, &d)).is_zero() {
                return Err(invalid(name, "homogeneous matrix is singular"));
            }
            ("projective", Kind::Projective { a, b, c, d })
        }
        "exp_scale" => {
            if S::EXACT {
                return Err(Error::Unsupported { backend: S::BACKEND, what: "exp_scale".into() });
            }
            let s: S = p.scalar("s")?;
            if s.is_zero() {
                return Err(invalid(name, "s = 0 collapses the map"));
            }
            ("exp_scale", Kind::ExpScale { s })
        }
        other => return Err(Error::UnknownMap(other.to_string())),
    };
    Ok(CatalogMap { name, params: params.clone(), dim, kind })
}

fn homogeneous<S: Scalar>(a: &Matrix<S>, b: &[S], c: &[S], d: &S) -> Matrix<S> {
    let mut m: Matrix<S> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    let mut last = c.to_vec();
    last.push(d.clone());
    m.push(last);
    m
}

fn linear_jets<S: Scalar>(a: &Matrix<S>, b: &[S], x: &[Jet<S>]) -> Vec<Jet<S>> {
    let (dim, order) = (x[0].dim(), x[0].order());
    a.iter()
        .zip(b)
        .map(|(row, bi)| {
            row.iter()
                .zip(x)
                .fold(Jet::constant(dim, order, bi.clone()), |acc, (c, xj)| &acc + &xj.scale(c))
        })
        .collect()
}

impl<S: Scalar> DiffeoMap<S> for CatalogMap<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn label(&self) -> String {
        format!("{}{}", self.name, self.params)
    }

    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: point.len() });
        }
        let x = Jet::identity(point, order);
        Ok(match &self.kind {
            Kind::Identity => x,
            Kind::Translation { b } => x.iter().zip(b).map(|(xi, bi)| xi.add_constant(bi)).collect(),
            Kind::Affine { a, b } => linear_jets(a, b, &x),
            Kind::Perturbation { eps } => (0..self.dim)
                .map(|i| {
                    let mut cubic = &(&x[i] * &x[i]) * &x[i];
                    if i > 0 {
                        cubic = &cubic + &(&(&x[i - 1] * &x[i - 1]) * &x[i]);
                    }
                    &x[i] + &cubic.scale(eps)
                })
                .collect(),
            Kind::Moebius { a, b, c, d } => {
                let num = x[0].scale(a).add_constant(b);
                let den = x[0].scale(c).add_constant(d);
                vec![num.div(&den).map_err(|_| pole(&self.label(), point))?]
            }
            Kind::Projective { a, b, c, d } => {
                let den = linear_jets(&vec![c.clone()], std::slice::from_ref(d), &x).remove(0);
                let inv = den.recip().map_err(|_| pole(&self.label(), point))?;
                linear_jets(a, b, &x).iter().map(|n| n * &inv).collect()
            }
            Kind::ExpScale { s } => x.iter().map(|xi| xi.scale(s).exp()).collect::<Result<_>>()?,
        })
    }

    fn apply(&self, point: &[S]) -> Result<Vec<S>> {
        Ok(self.jets(point, 0)?.iter().map(Jet::value).collect())
    }

    fn preimage(&self, y: &[S]) -> Result<Vec<S>> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: y.len() });
        }
        let no_pre = || Error::NoPreimage(format!("{} at {:?}", self.label(), y));
        match &self.kind {
            Kind::Identity => Ok(y.to_vec()),
            Kind::Translation { b } => Ok(y.iter().zip(b).map(|(v, c)| v.clone() - c.clone()).collect()),
            Kind::Affine { a, b } => {
                let ainv = inverse(a).ok_or(Error::SingularJacobian)?;
                let shifted: Vec<S> = y.iter().zip(b).map(|(v, c)| v.clone() - c.clone()).collect();
                Ok(mat_vec(&ainv, &shifted))
            }
            Kind::Perturbation { eps } if eps.is_zero() => Ok(y.to_vec()),
            Kind::Perturbation { .. } => super::newton_preimage(self, y),
            Kind::Moebius { a, b, c, d } => {
                let den = a.clone() - c.clone() * y[0].clone();
                let inv = den.recip().ok_or_else(no_pre)?;
                Ok(vec![(d.clone() * y[0].clone() - b.clone()) * inv])
            }
            Kind::Projective { a, b, c, d } => {
                let m = inverse(&homogeneous(a, b, c, d)).ok_or(Error::SingularJacobian)?;
                let mut yh = y.to_vec();
                yh.push(S::one());
                let xh = mat_vec(&m, &yh);
                let w = xh[self.dim].recip().ok_or_else(no_pre)?;
                Ok(xh[..self.dim].iter().map(|v| v.clone() * w.clone()).collect())
            }
            Kind::ExpScale { s } => y
                .iter()
                .map(|v| {
                    if !v.is_positive() {
                        return Err(no_pre());
                    }
                    let l = v.ln().ok_or_else(no_pre)?;
                    Ok(l / s.clone())
                })
                .collect(),
        }
    }

    fn orientation_preserving(&self) -> Option<bool> {
        match &self.kind {
            Kind::Identity | Kind::Translation { .. } => Some(true),
            Kind::Affine { a, .. } => Some(determinant(a).is_positive()),
            Kind::Perturbation { eps } => (eps.is_positive() || eps.is_zero()).then_some(true),
            Kind::Moebius { a, b, c, d } => {
                Some((a.clone() * d.clone() - b.clone() * c.clone()).is_positive())
            }
            Kind::Projective { a, b, c, d } => {
                let det = determinant(&homogeneous(a, b, c, d));
                (self.dim % 2 == 1).then(|| det.is_positive())
            }
            Kind::ExpScale { s } => Some(s.is_positive() || self.dim.is_multiple_of(2)),
        }
    }
}

fn pole<S: Scalar>(label: &str, point: &[S]) -> Error {
    Error::Domain(format!("{label} has a pole at {point:?}"))
}

/// Polynomial map given by its components.
#[derive(Clone)]
pub struct PolyMap<S: Scalar> {
    pub components: Vec<Poly<S>>,
    pub name: String,
}

impl<S: Scalar> fmt::Debug for PolyMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyMap({})", self.name)
    }
}

impl<S: Scalar> PolyMap<S> {
    pub fn new(name: impl Into<String>, components: Vec<Poly<S>>) -> Result<Self> {
        let n = components.len();
        if let Some(bad) = components.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
        }
        Ok(PolyMap { components, name: name.into() })
    }

    /// `x + (random terms of degree 2..=degree)`: unit Jacobian at the origin.
    pub fn random_near_identity<R: Rng + ?Sized>(rng: &mut R, dim: usize, degree: usize) -> Self {
        let components = (0..dim)
            .map(|i| {
                let higher: Vec<(Vec<u8>, S)> = Poly::<S>::random(rng, dim, degree, 0.5)
                    .terms()
                    .filter(|(e, _)| e.iter().map(|&v| v as usize).sum::<usize>() >= 2)
                    .map(|(e, c)| (e.to_vec(), c.clone() * S::from_ratio(1, 4)))
                    .collect();
                Poly::from_terms(dim, higher).add(&Poly::var(dim, i))
            })
            .collect();
        PolyMap { components, name: "random_polynomial".into() }
    }
}

impl<S: Scalar> DiffeoMap<S> for PolyMap<S> {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn label(&self) -> String {
        self.name.clone()
    }

    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>> {
        self.components.iter().map(|p| p.jet_at(point, order)).collect()
    }
}

fn q_json(r: Rational) -> Value {
    if r.is_integer() {
        json!(r.to_integer().to_string().parse::<i64>().unwrap_or(0))
    } else {
        json!(r.to_string())
    }
}

fn small_q<R: Rng + ?Sized>(rng: &mut R, scale: i64) -> Rational {
    small_rational::<Rational, R>(rng) / Rational::from_i64(scale)
}

/// Draws parameters for a catalog member such that the map is orientation
/// preserving (where that is declarable) and not globally degenerate.
/// Values are small rationals, encoded as JSON strings when fractional.
pub fn sample_params<R: Rng + ?Sized>(rng: &mut R, name: &str, dim: usize) -> Result<Value> {
    let vec_of = |rng: &mut R, scale: i64| -> Vec<Value> { (0..dim).map(|_| q_json(small_q(rng, scale))).collect() };
    let near_identity = |rng: &mut R| -> Matrix<Rational> {
        loop {
            let m: Matrix<Rational> = (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| {
                            let off = small_q(rng, 4);
                            if i == j { Rational::from_i64(1) + off } else { off }
                        })
                        .collect()
                })
                .collect();
            if determinant(&m).is_positive() {
                return m;
            }
        }
    };
    let mat_json = |m: Matrix<Rational>| -> Value {
        Value::Array(m.into_iter().map(|r| Value::Array(r.into_iter().map(q_json).collect())).collect())
    };
    Ok(match name {
        "identity" => json!({}),
        "translation" => json!({ "b": vec_of(rng, 2) }),
        "linear" => json!({ "a": mat_json(near_identity(rng)) }),
        "affine" => json!({ "a": mat_json(near_identity(rng)), "b": vec_of(rng, 2) }),
        "polynomial_perturbation" => json!({ "eps": q_json(num::Signed::abs(&small_q(rng, 2))) }),
        "moebius" => loop {
            let v: Vec<i64> = (0..4).map(|_| rng.gen_range(-3..=3)).collect();
            if v[0] * v[3] - v[1] * v[2] > 0 && v[2] != 0 {
                break json!({ "a": v[0], "b": v[1], "c": v[2], "d": v[3] });
            }
        },
        "projective" => loop {
            let a = near_identity(rng);
            let b: Vec<Rational> = (0..dim).map(|_| small_q(rng, 4)).collect();
            let c: Vec<Rational> = (0..dim).map(|_| small_q(rng, 4)).collect();
            let d = Rational::from_i64(1);
            if determinant(&homogeneous(&a, &b, &c, &d)).is_positive() {
                break json!({
                    "a": mat_json(a),
                    "b": b.into_iter().map(q_json).collect::<Vec<_>>(),
                    "c": c.into_iter().map(q_json).collect::<Vec<_>>(),
                    "d": 1,
                });
            }
        },
        "exp_scale" => json!({ "s": q_json(num::Signed::abs(&small_q(rng, 2))) }),
        other => return Err(Error::UnknownMap(other.to_string())),
    })
}
