use std::cell::Cell;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use super::{GroupCocycle, Value};
use crate::error::{Error, Result};
use crate::geometry::{cocycle_c, lift_connection, table_values, ConnectionRef, TensorRef};
use crate::maps::{cotangent_lift, jacobian_at, MapRef};
use crate::numkernel::linalg::{determinant, inverse};
use crate::numkernel::poly::JetFunction;
use crate::numkernel::{Poly, Scalar};
use crate::operators::{build_l_covariant, pullback_operator};

const QUADRATURE_NODES: usize = 16;

/// `log det Df(x)`.
pub fn log_volume_cocycle<S: Scalar>(f: &MapRef<S>, x: &[S]) -> Result<S> {
    let det = determinant(&jacobian_at(f.as_ref(), x)?);
    if det.is_zero() {
        return Err(Error::SingularJacobian);
    }
    if !det.is_positive() {
        return Err(Error::Domain(format!("{} reverses orientation at the sample point", f.label())));
    }
    det.ln().ok_or_else(|| Error::Unsupported { backend: S::BACKEND, what: format!("log of {det}") })
}

/// `ℓ(f) = f*Γ - Γ` on the base.
pub fn connection_cocycle<S: Scalar>(f: &MapRef<S>, gamma: &ConnectionRef<S>) -> Result<TensorRef<S>> {
    cocycle_c(f, gamma)
}

/// `∫ dφ` along any path from `x` to `f(x)`, i.e. `φ(f(x)) - φ(x)`.
pub fn derham_cocycle<S: Scalar>(phi: &dyn JetFunction<S>, f: &MapRef<S>, x: &[S]) -> Result<S> {
    let y = f.apply(x)?;
    Ok(phi.value(&y)? - phi.value(x)?)
}

/// `∫_0^1 ∇φ(x + s(y - x))·(y - x) ds` by Gauss–Legendre quadrature.
pub fn derham_path_integral(phi: &dyn JetFunction<f64>, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(QUADRATURE_NODES).expect("nonzero node count"));
    let failed = Cell::new(None);
    let dir: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    let value = rule.integrate(0.0, 1.0, |s| {
        let at: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + s * d).collect();
        match phi.jet(&at, 1).and_then(|j| j.gradient()) {
            Ok(grad) => grad.iter().zip(&dir).map(|(g, d)| g.value() * d).sum(),
            Err(e) => {
                failed.set(Some(e));
                0.0
            }
        }
    });
    match failed.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `S(f) = f'''/f' - 3/2 (f''/f')²`.
pub fn schwarzian_1d<S: Scalar>(f: &MapRef<S>, x: &[S]) -> Result<S> {
    if f.dim() != 1 || x.len() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: x.len().max(f.dim()) });
    }
    let j = &f.jets(x, 3)?[0];
    let d1 = j.derivative(&[1])?;
    let d2 = j.derivative(&[2])?;
    let d3 = j.derivative(&[3])?;
    let inv = d1.recip().ok_or_else(|| Error::Domain(format!("{} has a critical point at {}", f.label(), x[0])))?;
    let r = d2 * inv.clone();
    Ok(d3 * inv - S::from_ratio(3, 2) * r.clone() * r)
}

fn pull_tensor<S: Scalar>(h: &MapRef<S>, value: &Value<S>, point: &[S]) -> Result<Value<S>> {
    let Value::Tensor(t) = value else {
        return Err(Error::Domain("expected a tensor value".into()));
    };
    let jac = jacobian_at(h.as_ref(), point)?;
    let jinv = inverse(&jac).ok_or(Error::SingularJacobian)?;
    let d = t.len();
    let mut mid = vec![vec![vec![S::zero(); d]; d]; d];
    for c in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = S::zero();
                for a in 0..d {
                    for b in 0..d {
                        if !t[c][a][b].is_zero() {
                            acc = acc + t[c][a][b].clone() * jac[a][i].clone() * jac[b][j].clone();
                        }
                    }
                }
                mid[c][i][j] = acc;
            }
        }
    }
    let out = (0..d)
        .map(|k| {
            (0..d)
                .map(|i| (0..d).map(|j| (0..d).fold(S::zero(), |acc, c| acc + jinv[k][c].clone() * mid[c][i][j].clone())).collect())
                .collect()
        })
        .collect();
    Ok(Value::Tensor(out))
}

fn scalar<S: Scalar>(value: &Value<S>) -> Result<S> {
    match value {
        Value::Scalar(v) => Ok(v.clone()),
        _ => Err(Error::Domain("expected a scalar value".into())),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LogVolume;

impl<S: Scalar> GroupCocycle<S> for LogVolume {
    fn name(&self) -> String {
        "log_volume".into()
    }

    fn evaluate(&self, f: &MapRef<S>, point: &[S]) -> Result<Value<S>> {
        log_volume_cocycle(f, point).map(Value::Scalar)
    }

    fn act(&self, _h: &MapRef<S>, value: &Value<S>, _point: &[S]) -> Result<Value<S>> {
        scalar(value).map(Value::Scalar)
    }
}

#[derive(Debug, Clone)]
pub struct ConnectionCocycle<S: Scalar> {
    pub gamma: ConnectionRef<S>,
}

impl<S: Scalar> GroupCocycle<S> for ConnectionCocycle<S> {
    fn name(&self) -> String {
        "connection".into()
    }

    fn evaluate(&self, f: &MapRef<S>, point: &[S]) -> Result<Value<S>> {
        let c = connection_cocycle(f, &self.gamma)?.components(point, 0)?;
        Ok(Value::Tensor(table_values(&c)))
    }

    fn act(&self, h: &MapRef<S>, value: &Value<S>, point: &[S]) -> Result<Value<S>> {
        pull_tensor(h, value, point)
    }
}

/// `C(f̃) = f̃*Γ̃ - Γ̃` for the lifted connection on `T*M`.
#[derive(Debug, Clone)]
pub struct LiftedConnectionCocycle<S: Scalar> {
    pub gamma: ConnectionRef<S>,
}

impl<S: Scalar> GroupCocycle<S> for LiftedConnectionCocycle<S> {
    fn name(&self) -> String {
        "cocycle_C".into()
    }

    fn on_cotangent(&self) -> bool {
        true
    }

    fn evaluate(&self, f: &MapRef<S>, point: &[S]) -> Result<Value<S>> {
        let c = cocycle_c(&cotangent_lift(f), &lift_connection(&self.gamma))?.components(point, 0)?;
        Ok(Value::Tensor(table_values(&c)))
    }

    fn act(&self, h: &MapRef<S>, value: &Value<S>, point: &[S]) -> Result<Value<S>> {
        pull_tensor(&cotangent_lift(h), value, point)
    }
}

/// The de Rham cocycle of an exact form `dφ`. Every evaluation is checked
/// against the straight-line path integral.
#[derive(Debug, Clone)]
pub struct DeRham<S: Scalar> {
    pub potential: Poly<S>,
}

impl<S: Scalar> GroupCocycle<S> for DeRham<S> {
    fn name(&self) -> String {
        "derham".into()
    }

    fn evaluate(&self, f: &MapRef<S>, point: &[S]) -> Result<Value<S>> {
        let v = derham_cocycle(&self.potential, f, point)?;
        let phi64 = Poly::<f64>::from_terms(
            self.potential.dim(),
            self.potential.terms().map(|(e, c)| (e.to_vec(), c.to_f64())),
        );
        let x: Vec<f64> = point.iter().map(Scalar::to_f64).collect();
        let y: Vec<f64> = f.apply(point)?.iter().map(Scalar::to_f64).collect();
        let q = derham_path_integral(&phi64, &x, &y)?;
        let expect = v.to_f64();
        if (q - expect).abs() > 1e-9 * expect.abs().max(1.0) {
            return Err(Error::Domain(format!("path integral {q} disagrees with potential difference {expect}")));
        }
        Ok(Value::Scalar(v))
    }

    fn act(&self, _h: &MapRef<S>, value: &Value<S>, _point: &[S]) -> Result<Value<S>> {
        scalar(value).map(Value::Scalar)
    }
}

/// Values are quadratic differentials: `h*q = (q∘h) h'²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Schwarzian;

impl<S: Scalar> GroupCocycle<S> for Schwarzian {
    fn name(&self) -> String {
        "schwarzian".into()
    }

    fn evaluate(&self, f: &MapRef<S>, point: &[S]) -> Result<Value<S>> {
        schwarzian_1d(f, point).map(Value::Scalar)
    }

    fn act(&self, h: &MapRef<S>, value: &Value<S>, point: &[S]) -> Result<Value<S>> {
        let d = h.jets(point, 1)?[0].derivative(&[1])?;
        Ok(Value::Scalar(scalar(value)? * d.clone() * d))
    }
}

#[derive(Debug, Clone)]
pub struct OperatorCocycle<S: Scalar> {
    pub gamma: ConnectionRef<S>,
}

impl<S: Scalar> GroupCocycle<S> for OperatorCocycle<S> {
    fn name(&self) -> String {
        "operator_L".into()
    }

    fn on_cotangent(&self) -> bool {
        true
    }

    fn evaluate(&self, f: &MapRef<S>, point: &[S]) -> Result<Value<S>> {
        build_l_covariant(f, &self.gamma, point).map(Value::Operator)
    }

    fn act(&self, h: &MapRef<S>, value: &Value<S>, point: &[S]) -> Result<Value<S>> {
        let Value::Operator(op) = value else {
            return Err(Error::Domain("expected an operator value".into()));
        };
        pullback_operator(h, op, point).map(Value::Operator)
    }
}
