//! Group and algebra 1-cocycles, and the engine that checks their identities
//! at sample points.
//!
//! Every group cocycle is arranged as `c(f∘h) = h*c(f) + c(h)`, where `h*` is
//! the natural pullback on the value space. Algebra cocycles satisfy
//! `c([X,Y]) = X·c(Y) - Y·c(X)` with `·` the Lie derivative.
//!
//! `P³` is the bare third-order contraction; the `1/3!` of the Moyal series
//! is left out.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{catalog_get, compose, MapRef};
use crate::numkernel::Scalar;
use crate::operators::{LocalDiffOp, Symbol};

mod algebra;
mod consistency;
mod group;

pub use algebra::{
    bracket_antisymmetry_residual, chevalley_eilenberg_residual, divergence_cocycle, hamiltonian_jets,
    jacobi_residual, lie_derivative_connection, moyal_p3, moyal_p3_jet, poisson_jet, tensor_lie_derivative,
    vect_embedding_cocycle, verify_algebra_cocycle, AlgebraCocycle, Divergence, LieDerivativeConnection, Vey,
};
pub use consistency::{consistency_case, group_algebra_consistency, ConsistencyPair, CONSISTENCY_FLOOR};
pub use group::{
    connection_cocycle, derham_cocycle, derham_path_integral, log_volume_cocycle, schwarzian_1d,
    ConnectionCocycle, DeRham, LiftedConnectionCocycle, LogVolume, OperatorCocycle, Schwarzian,
};

/// A cocycle value at one point.
#[derive(Debug, Clone, PartialEq)]
pub enum Value<S: Scalar> {
    Scalar(S),
    Tensor(Vec<Vec<Vec<S>>>),
    Operator(LocalDiffOp<S>),
    Symbol(Symbol<S>),
}

impl<S: Scalar> Value<S> {
    /// `self + sign·other`.
    pub fn combine(&self, other: &Self, sign: i64) -> Result<Self> {
        let s = S::from_i64(sign);
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(a.clone() + s * b.clone())),
            (Value::Tensor(a), Value::Tensor(b)) => {
                if a.len() != b.len() {
                    return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
                }
                let t = a
                    .iter()
                    .zip(b)
                    .map(|(ak, bk)| {
                        ak.iter()
                            .zip(bk)
                            .map(|(ai, bi)| ai.iter().zip(bi).map(|(x, y)| x.clone() + s.clone() * y.clone()).collect())
                            .collect()
                    })
                    .collect();
                Ok(Value::Tensor(t))
            }
            (Value::Operator(a), Value::Operator(b)) => Ok(Value::Operator(a.checked_add(&b.scale(&s))?)),
            (Value::Symbol(a), Value::Symbol(b)) => {
                let p = a.to_poly().add(&b.to_poly().scale(&s));
                Ok(Value::Symbol(Symbol::from_poly(a.base_dim(), &p)?))
            }
            _ => Err(Error::Domain("cocycle values of different kinds".into())),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Value::Scalar(v) => v.magnitude(),
            Value::Tensor(t) => t.iter().flatten().flatten().map(Scalar::magnitude).fold(0.0, f64::max),
            Value::Operator(op) => op.max_abs(),
            Value::Symbol(p) => p.to_poly().terms().map(|(_, c)| c.magnitude()).fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Scalar(v) => v.is_zero(),
            Value::Tensor(t) => t.iter().flatten().flatten().all(|v| v.is_zero()),
            Value::Operator(op) => op.is_zero(),
            Value::Symbol(p) => p.is_zero(),
        }
    }
}

/// How far two sides of an identity are apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub exact_zero: bool,
    pub abs: f64,
    /// Largest magnitude among the terms entering the identity.
    pub scale: f64,
}

impl Discrepancy {
    pub fn between<S: Scalar>(lhs: &Value<S>, rhs: &Value<S>, terms: &[&Value<S>]) -> Result<Self> {
        let diff = lhs.combine(rhs, -1)?;
        let scale = terms.iter().map(|v| v.max_abs()).fold(lhs.max_abs(), f64::max);
        Ok(Discrepancy { exact_zero: diff.is_zero(), abs: diff.max_abs(), scale })
    }

    /// Exact backends demand an exact zero; floats compare against
    /// `tol · max(1, scale)`.
    pub fn passes(&self, exact: bool, tol: f64) -> bool {
        if exact {
            self.exact_zero
        } else {
            self.exact_zero || self.abs <= tol * self.scale.max(1.0)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub case_id: String,
    pub maps: Vec<String>,
    pub point: Vec<String>,
    pub residual: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
}

impl CaseResult {
    pub fn from_outcome(case_id: String, maps: Vec<String>, point: Vec<String>, outcome: Result<(f64, bool)>) -> Self {
        match outcome {
            Ok((residual, pass)) => CaseResult { case_id, maps, point, residual: Some(residual), pass, error: None },
            Err(e) => CaseResult { case_id, maps, point, residual: None, pass: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub cases: Vec<CaseResult>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.pass).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.cases.iter().filter_map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: Report) {
        self.cases.extend(other.cases);
    }
}

pub fn point_strings<S: Scalar>(p: &[S]) -> Vec<String> {
    p.iter().map(ToString::to_string).collect()
}

pub trait GroupCocycle<S: Scalar>: Send + Sync {
    fn name(&self) -> String;

    /// Whether values live over `T*M` (points of dimension `2n`).
    fn on_cotangent(&self) -> bool {
        false
    }

    fn evaluate(&self, f: &MapRef<S>, point: &[S]) -> Result<Value<S>>;

    /// `(h* v)(point)` for a value `v` taken at `image(h, point)`.
    fn act(&self, h: &MapRef<S>, value: &Value<S>, point: &[S]) -> Result<Value<S>>;

    fn image(&self, h: &MapRef<S>, point: &[S]) -> Result<Vec<S>> {
        if self.on_cotangent() {
            crate::maps::cotangent_lift(h).apply(point)
        } else {
            h.apply(point)
        }
    }
}

/// Which identity the engine tests. `Swapped` pairs the cocycle with the
/// opposite convention `c(f∘h) = f*c(h) + c(f)` and serves as a control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrangement {
    Declared,
    Swapped,
}

pub fn group_discrepancy<S: Scalar, C: GroupCocycle<S> + ?Sized>(
    c: &C,
    f: &MapRef<S>,
    h: &MapRef<S>,
    point: &[S],
    arrangement: Arrangement,
) -> Result<Discrepancy> {
    let lhs = c.evaluate(&compose(f, h)?, point)?;
    let (outer, inner) = match arrangement {
        Arrangement::Declared => (f, h),
        Arrangement::Swapped => (h, f),
    };
    let at = c.image(inner, point)?;
    let pulled = c.act(inner, &c.evaluate(outer, &at)?, point)?;
    let own = c.evaluate(inner, point)?;
    let rhs = pulled.combine(&own, 1)?;
    Discrepancy::between(&lhs, &rhs, &[&pulled, &own])
}

pub fn verify_group_cocycle<S: Scalar, C: GroupCocycle<S> + ?Sized>(
    c: &C,
    f: &MapRef<S>,
    h: &MapRef<S>,
    points: &[Vec<S>],
    tol: f64,
    arrangement: Arrangement,
) -> Report {
    let cases = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let outcome = group_discrepancy(c, f, h, p, arrangement).map(|d| (d.abs, d.passes(S::EXACT, tol)));
            CaseResult::from_outcome(format!("{}#{i}", c.name()), vec![f.label(), h.label()], point_strings(p), outcome)
        })
        .collect();
    Report { cases }
}

/// Residuals of `id* v = v` and `(f∘h)* v = h*(f* v)` for `v = c(g)`.
pub fn action_axiom_residuals<S: Scalar, C: GroupCocycle<S> + ?Sized>(
    c: &C,
    f: &MapRef<S>,
    h: &MapRef<S>,
    g: &MapRef<S>,
    point: &[S],
) -> Result<(Discrepancy, Discrepancy)> {
    let id: MapRef<S> = catalog_get("identity", &serde_json::json!({}), f.dim())?;
    let v = c.evaluate(g, point)?;
    let unit = Discrepancy::between(&c.act(&id, &v, point)?, &v, &[])?;

    let fh = compose(f, h)?;
    let far = c.image(&fh, point)?;
    let w = c.evaluate(g, &far)?;
    let direct = c.act(&fh, &w, point)?;
    let mid = c.image(h, point)?;
    let stepwise = c.act(h, &c.act(f, &w, &mid)?, point)?;
    let comp = Discrepancy::between(&direct, &stepwise, &[&w])?;
    Ok((unit, comp))
}
