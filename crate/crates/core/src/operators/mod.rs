//! Third-order operators `L(f)` on `T*M`, fiber-polynomial symbols, and the
//! group actions on functions and operators.
//!
//! A [`LocalDiffOp`] is a table `α ↦ c_α` of coefficients of `∂^α` at one
//! chart point of `T*M`; it acts on jets of scalars at that point.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::numkernel::monomials::{multi_factorial, table};
use crate::numkernel::{Jet, Scalar};

mod action;
mod build;
mod symbol;

pub use action::{act_on_function, act_on_operator, pullback_operator, Transported};
pub use build::{build_l_coordinate, build_l_covariant, build_l_flat, flat_triangle_factor, FLAT_TRIANGLE_FACTOR};
pub use symbol::{apply_op_to_symbol, FiberOperator, Symbol, FIBER_DEGREE};

pub const MAX_OP_ORDER: usize = 3;

#[derive(Clone, PartialEq)]
pub struct LocalDiffOp<S: Scalar> {
    dim: usize,
    point: Vec<S>,
    terms: BTreeMap<Vec<u8>, S>,
}

impl<S: Scalar> fmt::Debug for LocalDiffOp<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (k, v) in &self.terms {
            m.entry(k, &format_args!("{v}"));
        }
        m.finish()
    }
}

impl<S: Scalar> LocalDiffOp<S> {
    pub fn zero(point: &[S]) -> Self {
        LocalDiffOp { dim: point.len(), point: point.to_vec(), terms: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u8>, S)>>(point: &[S], terms: I) -> Result<Self> {
        let mut op = Self::zero(point);
        for (k, v) in terms {
            op.add_term(&k, v)?;
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self) -> &[S] {
        &self.point
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &S)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coeff(&self, exps: &[u8]) -> S {
        self.terms.get(exps).cloned().unwrap_or_else(S::zero)
    }

    /// Adds `c ∂^α` to the operator.
    pub fn add_term(&mut self, exps: &[u8], c: S) -> Result<()> {
        if exps.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: exps.len() });
        }
        let order: usize = exps.iter().map(|&e| e as usize).sum();
        if order > MAX_OP_ORDER {
            return Err(Error::InsufficientOrder { needed: order, have: MAX_OP_ORDER });
        }
        let v = self.coeff(exps) + c;
        if v.is_zero() {
            self.terms.remove(exps);
        } else {
            self.terms.insert(exps.to_vec(), v);
        }
        Ok(())
    }

    /// Adds `c ∂_{a_1} ⋯ ∂_{a_m}` for an ordered axis list.
    pub fn add_axes(&mut self, axes: &[usize], c: S) -> Result<()> {
        let mut e = vec![0u8; self.dim];
        for &a in axes {
            if a >= self.dim {
                return Err(Error::AxisOutOfRange { axis: a, dim: self.dim });
            }
            e[a] += 1;
        }
        self.add_term(&e, c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(|k| k.iter().map(|&e| e as usize).sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(&self.point);
        for (k, v) in &self.terms {
            let c = v.clone() * s.clone();
            if !c.is_zero() {
                out.terms.insert(k.clone(), c);
            }
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k, v.clone())?;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(&-S::one()))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    /// Applies the operator to the jet of a scalar at [`Self::point`].
    pub fn apply(&self, q: &Jet<S>) -> Result<S> {
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: q.dim() });
        }
        if q.order() < self.order() {
            return Err(Error::InsufficientOrder { needed: self.order(), have: q.order() });
        }
        let mut acc = S::zero();
        for (k, v) in &self.terms {
            acc = acc + v.clone() * q.derivative(k)?;
        }
        Ok(acc)
    }

    /// Re-expresses the operator at a new point through a local change of
    /// variables `φ` from a neighbourhood of `self.point` to one of `new_point`
    /// (given by its jets at `self.point`): the result `T'` satisfies
    /// `T'(Q) = T(Q ∘ φ)`.
    pub fn transport(&self, phi: &[Jet<S>], new_point: &[S]) -> Result<Self> {
        if phi.len() != new_point.len() {
            return Err(Error::ArityMismatch { expected: new_point.len(), found: phi.len() });
        }
        let order = self.order();
        let shifted: Vec<Jet<S>> = phi.iter().map(|j| j.truncate(order).add_constant(&-j.value())).collect();
        let mut out = Self::zero(new_point);
        if self.is_zero() {
            return Ok(out);
        }
        let tab = table(new_point.len(), order);
        for delta in tab.exps.iter() {
            // Q_δ = (y - new_point)^δ / δ!, pulled back through φ
            let mut q = Jet::constant(self.dim, order, S::one());
            for (axis, &e) in delta.iter().enumerate() {
                for _ in 0..e {
                    q = &q * &shifted[axis];
                }
            }
            let q = q.scale(&S::from_i64(multi_factorial(delta)).recip().expect("nonzero factorial"));
            let c = self.apply(&q)?;
            out.add_term(delta, c)?;
        }
        Ok(out)
    }
}

/// Applies `op` to `q` at the operator's own point.
pub fn apply_op<S: Scalar>(op: &LocalDiffOp<S>, q: &dyn crate::numkernel::poly::JetFunction<S>) -> Result<S> {
    let jet = q.jet(op.point(), op.order().max(MAX_OP_ORDER))?;
    op.apply(&jet)
}

/// Jets at `point` of the unit basis `(z - point)^α / α!`, `|α| <= MAX_OP_ORDER`,
/// paired with their exponents.
pub fn probe_monomials<S: Scalar>(point: &[S]) -> Vec<(Vec<u8>, Jet<S>)> {
    let d = point.len();
    table(d, MAX_OP_ORDER)
        .exps
        .iter()
        .map(|e| {
            let mut j = Jet::zero(d, MAX_OP_ORDER);
            j.set_coeff(e, S::from_i64(multi_factorial(e)).recip().expect("nonzero factorial"));
            (e.clone(), j)
        })
        .collect()
}
