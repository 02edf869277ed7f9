//! Dense truncated multivariate Taylor expansions.
//!
//! A [`Jet`] stores the monomial coefficients `∂^α f / α!` of a function at
//! an implicit base point, for every multi-index with `|α| <= order`. The
//! base point itself is not recorded: composition treats the constant terms
//! of the inner jets as the base point of the outer jet.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::monomials::{multi_factorial, table, MonomialTable};
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Jet<S> {
    table: Arc<MonomialTable>,
    coeffs: Vec<S>,
}

impl<S: Scalar> PartialEq for Jet<S> {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

impl<S: Scalar> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(dim={}, order={}) [", self.dim(), self.order())?;
        let mut first = true;
        for (e, c) in self.table.exps.iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{c}·{e:?}")?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> Jet<S> {
    pub fn zero(dim: usize, order: usize) -> Self {
        let table = table(dim, order);
        let coeffs = vec![S::zero(); table.len()];
        Jet { table, coeffs }
    }

    pub fn constant(dim: usize, order: usize, value: S) -> Self {
        let mut j = Self::zero(dim, order);
        j.coeffs[0] = value;
        j
    }

    /// The jet of the coordinate function `x_axis` at a point whose
    /// `axis`-th coordinate is `base`.
    pub fn variable(dim: usize, order: usize, axis: usize, base: S) -> Self {
        let mut j = Self::constant(dim, order, base);
        if order >= 1 {
            j.coeffs[1 + axis] = S::one();
        }
        j
    }

    /// Identity jets `x_i = point_i + u_i` at `point`.
    pub fn identity(point: &[S], order: usize) -> Vec<Self> {
        let dim = point.len();
        (0..dim).map(|i| Self::variable(dim, order, i, point[i].clone())).collect()
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<S>) -> Result<Self> {
        let table = table(dim, order);
        if coeffs.len() != table.len() {
            return Err(Error::DimensionMismatch { expected: table.len(), found: coeffs.len() });
        }
        Ok(Jet { table, coeffs })
    }

    /// Builds a jet from `(exponents, coefficient)` pairs; monomials beyond
    /// `order` are dropped.
    pub fn from_terms<I>(dim: usize, order: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u8>, S)>,
    {
        let mut j = Self::zero(dim, order);
        for (e, c) in terms {
            assert_eq!(e.len(), dim, "exponent length must equal jet dimension");
            if let Some(pos) = j.table.position(&e) {
                j.coeffs[pos] = j.coeffs[pos].clone() + c;
            }
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.table.dim
    }

    pub fn order(&self) -> usize {
        self.table.order
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.table.exps
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &S)> {
        self.table.exps.iter().map(|e| e.as_slice()).zip(self.coeffs.iter())
    }

    /// Monomial coefficient `∂^α f / α!`, zero beyond the truncation order.
    pub fn coeff(&self, exps: &[u8]) -> S {
        self.table.position(exps).map(|p| self.coeffs[p].clone()).unwrap_or_else(S::zero)
    }

    pub fn set_coeff(&mut self, exps: &[u8], value: S) {
        if let Some(p) = self.table.position(exps) {
            self.coeffs[p] = value;
        }
    }

    /// Raw mixed partial `∂^α f` at the base point.
    pub fn derivative(&self, exps: &[u8]) -> Result<S> {
        let degree: usize = exps.iter().map(|&e| e as usize).sum();
        if degree > self.order() {
            return Err(Error::InsufficientOrder { needed: degree, have: self.order() });
        }
        Ok(self.coeff(exps) * S::from_i64(multi_factorial(exps)))
    }

    pub fn value(&self) -> S {
        self.coeffs[0].clone()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Highest total degree carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .zip(&self.table.degrees)
            .filter(|(c, _)| !c.is_zero())
            .map(|(_, &d)| d)
            .max()
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let table = table(self.dim(), order);
        let coeffs = self.coeffs[..table.len()].to_vec();
        Jet { table, coeffs }
    }

    /// Pads with zero coefficients up to `order`. Only meaningful for exact
    /// polynomials whose degree does not exceed the current order.
    pub fn raise(&self, order: usize) -> Self {
        if order <= self.order() {
            return self.truncate(order);
        }
        let table = table(self.dim(), order);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(table.len(), S::zero());
        Jet { table, coeffs }
    }

    pub fn scale(&self, s: &S) -> Self {
        Jet {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    pub fn add_constant(&self, s: &S) -> Self {
        let mut j = self.clone();
        j.coeffs[0] = j.coeffs[0].clone() + s.clone();
        j
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.add_aligned(other))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.sub_aligned(other))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.mul_aligned(other))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if self.order() != other.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    fn aligned<'a>(&'a self, other: &'a Self) -> (Self, Self) {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        let order = self.order().min(other.order());
        (self.truncate(order), other.truncate(order))
    }

    fn add_aligned(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let coeffs = a.coeffs.into_iter().zip(b.coeffs).map(|(x, y)| x + y).collect();
        Jet { table: a.table, coeffs }
    }

    fn sub_aligned(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let coeffs = a.coeffs.into_iter().zip(b.coeffs).map(|(x, y)| x - y).collect();
        Jet { table: a.table, coeffs }
    }

    fn mul_aligned(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let mut coeffs = vec![S::zero(); a.table.len()];
        for &(i, j, k) in &a.table.products {
            let (x, y) = (&a.coeffs[i as usize], &b.coeffs[j as usize]);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let k = k as usize;
            coeffs[k] = coeffs[k].clone() + x.clone() * y.clone();
        }
        Jet { table: a.table, coeffs }
    }

    /// Jet of `∂f/∂x_axis`; the order drops by one.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim() });
        }
        if self.order() == 0 {
            return Err(Error::InsufficientOrder { needed: 1, have: 0 });
        }
        let out_table = table(self.dim(), self.order() - 1);
        let coeffs = out_table
            .exps
            .iter()
            .map(|e| {
                let mut up = e.clone();
                up[axis] += 1;
                let c = self.coeff(&up);
                c * S::from_i64(up[axis] as i64)
            })
            .collect();
        Ok(Jet { table: out_table, coeffs })
    }

    /// Gradient jets, one per axis.
    pub fn gradient(&self) -> Result<Vec<Self>> {
        (0..self.dim()).map(|a| self.partial(a)).collect()
    }

    /// Treats `self` as a polynomial in its variables and substitutes the
    /// given jets verbatim (no base-point shift). The result has the common
    /// dimension and the minimum order of the inner jets.
    pub fn substitute(&self, inners: &[Jet<S>]) -> Result<Self> {
        if inners.len() != self.dim() {
            return Err(Error::ArityMismatch { expected: self.dim(), found: inners.len() });
        }
        let Some(first) = inners.first() else {
            return Err(Error::ArityMismatch { expected: 1, found: 0 });
        };
        let d = first.dim();
        let order = inners.iter().map(|j| j.order()).min().unwrap_or(0);
        for j in inners {
            if j.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: j.dim() });
            }
        }
        let inners: Vec<Jet<S>> = inners.iter().map(|j| j.truncate(order)).collect();
        // inner jets without constant term make high-degree monomials vanish
        let nilpotent = inners.iter().all(|j| j.value().is_zero());

        let mut acc = Jet::zero(d, order);
        let mut powers: Vec<Option<Jet<S>>> = vec![None; self.table.len()];
        for idx in 0..self.table.len() {
            let deg = self.table.degrees[idx];
            if nilpotent && deg > order {
                break;
            }
            let mono = if idx == 0 {
                Jet::constant(d, order, S::one())
            } else {
                let (parent, axis) = self.table.parents[idx];
                let p = powers[parent].as_ref().expect("parent power computed first");
                p.mul_aligned(&inners[axis])
            };
            let c = &self.coeffs[idx];
            if !c.is_zero() {
                acc = acc.add_aligned(&mono.scale(c));
            }
            powers[idx] = Some(mono);
        }
        Ok(acc)
    }

    /// Taylor expansion of `outer ∘ inners`, where `outer` is expanded at the
    /// point given by the constant terms of `inners`.
    pub fn compose(&self, inners: &[Jet<S>]) -> Result<Self> {
        let shifted: Vec<Jet<S>> = inners
            .iter()
            .map(|j| {
                let mut s = j.clone();
                s.coeffs[0] = S::zero();
                s
            })
            .collect();
        let order = inners.iter().map(|j| j.order()).min().unwrap_or(0).min(self.order());
        let shifted: Vec<Jet<S>> = shifted.iter().map(|j| j.truncate(order)).collect();
        self.truncate(order).substitute(&shifted)
    }

    /// `g ∘ self` for a univariate `g` given by its Taylor coefficients
    /// `g^(k)(c)/k!` at `c = self.value()`.
    pub fn map_univariate(&self, taylor: &[S]) -> Self {
        let mut shifted = self.clone();
        shifted.coeffs[0] = S::zero();
        let mut acc = Jet::zero(self.dim(), self.order());
        let mut power = Jet::constant(self.dim(), self.order(), S::one());
        for (k, c) in taylor.iter().enumerate().take(self.order() + 1) {
            if k > 0 {
                power = power.mul_aligned(&shifted);
            }
            acc = acc.add_aligned(&power.scale(c));
        }
        acc
    }

    pub fn recip(&self) -> Result<Self> {
        let c = self.value();
        let inv = c.recip().ok_or(Error::Domain("reciprocal of a jet with zero value".into()))?;
        let mut taylor = Vec::with_capacity(self.order() + 1);
        let mut term = inv.clone();
        for _ in 0..=self.order() {
            taylor.push(term.clone());
            term = -(term * inv.clone());
        }
        Ok(self.map_univariate(&taylor))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_aligned(&other.recip()?))
    }

    pub fn exp(&self) -> Result<Self> {
        let e = self.value().exp().ok_or(Error::Unsupported {
            backend: S::BACKEND,
            what: "exp of a non-zero scalar".into(),
        })?;
        let mut taylor = Vec::with_capacity(self.order() + 1);
        let mut term = e;
        for k in 0..=self.order() {
            if k > 0 {
                term = term / S::from_i64(k as i64);
            }
            taylor.push(term.clone());
        }
        Ok(self.map_univariate(&taylor))
    }

    pub fn ln(&self) -> Result<Self> {
        let c = self.value();
        if !c.is_positive() {
            return Err(Error::Domain("logarithm of a non-positive value".into()));
        }
        let l = c.ln().ok_or(Error::Unsupported {
            backend: S::BACKEND,
            what: "logarithm of a value other than 1".into(),
        })?;
        let inv = c.recip().expect("positive value is invertible");
        let mut taylor = vec![l];
        let mut pow = S::one();
        for k in 1..=self.order() {
            pow = pow * inv.clone();
            let sign = if k % 2 == 1 { S::one() } else { -S::one() };
            taylor.push(sign * pow.clone() / S::from_i64(k as i64));
        }
        Ok(self.map_univariate(&taylor))
    }

    /// Re-expresses a jet in `new_dim` variables, sending variable `i` to
    /// variable `axes[i]`.
    pub fn embed(&self, new_dim: usize, axes: &[usize]) -> Self {
        assert_eq!(axes.len(), self.dim());
        let mut out = Jet::zero(new_dim, self.order());
        for (e, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            let mut ne = vec![0u8; new_dim];
            for (i, &v) in e.iter().enumerate() {
                ne[axes[i]] += v;
            }
            out.set_coeff(&ne, c.clone());
        }
        out
    }

    /// Largest coefficient magnitude of `self - other` (orders aligned).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub_aligned(other).coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let (a, b) = self.aligned(other);
        a.coeffs.iter().zip(&b.coeffs).all(|(x, y)| x.approx_eq(y, rel_tol))
    }
}

impl<S: Scalar> Add for &Jet<S> {
    type Output = Jet<S>;
    fn add(self, rhs: &Jet<S>) -> Jet<S> {
        self.add_aligned(rhs)
    }
}

impl<S: Scalar> Sub for &Jet<S> {
    type Output = Jet<S>;
    fn sub(self, rhs: &Jet<S>) -> Jet<S> {
        self.sub_aligned(rhs)
    }
}

/// Truncated product; operands of different orders are truncated to the
/// smaller order first. Panics on dimension mismatch.
impl<S: Scalar> Mul for &Jet<S> {
    type Output = Jet<S>;
    fn mul(self, rhs: &Jet<S>) -> Jet<S> {
        self.mul_aligned(rhs)
    }
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Jet<S>;
    fn add(self, rhs: Jet<S>) -> Jet<S> {
        self.add_aligned(&rhs)
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Jet<S>;
    fn sub(self, rhs: Jet<S>) -> Jet<S> {
        self.sub_aligned(&rhs)
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Jet<S>;
    fn mul(self, rhs: Jet<S>) -> Jet<S> {
        self.mul_aligned(&rhs)
    }
}

impl<S: Scalar> Neg for &Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        Jet { table: self.table.clone(), coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        -&self
    }
}

/// Sum of an iterator of jets of a known shape.
pub fn jet_sum<S: Scalar, I: IntoIterator<Item = Jet<S>>>(dim: usize, order: usize, it: I) -> Jet<S> {
    it.into_iter().fold(Jet::zero(dim, order), |acc, j| &acc + &j)
}

/// Local inverse of a map given by `d` jets in `d` variables, expanded at
/// `domain_point`.
///
/// The returned jets are expansions at the image point `F(x0)` with
/// constant terms `x0 = domain_point`, such that `compose(g, F)` is the
/// identity jet at `x0` up to the common order. Each fixed-point sweep
/// `G ← x0 + A⁻¹(v − N(G − x0))` fixes one more order.
pub fn jet_invert<S: Scalar>(map: &[Jet<S>], domain_point: &[S]) -> Result<Vec<Jet<S>>> {
    let d = map.len();
    if domain_point.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: domain_point.len() });
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    for j in map {
        if j.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: j.dim() });
        }
    }
    let order = map.iter().map(|j| j.order()).min().unwrap_or(0);
    if order == 0 {
        return Err(Error::InsufficientOrder { needed: 1, have: 0 });
    }
    let jac: Vec<Vec<S>> =
        map.iter().map(|j| (0..d).map(|a| j.coeffs[1 + a].clone()).collect()).collect();
    let jac_inv = super::linalg::inverse(&jac).ok_or(Error::SingularJacobian)?;

    // N(u) = F(x0 + u) - F(x0) - A u
    let remainder: Vec<Jet<S>> = map
        .iter()
        .map(|j| {
            let mut r = j.truncate(order);
            for c in r.coeffs.iter_mut().take(d + 1) {
                *c = S::zero();
            }
            r
        })
        .collect();

    let v: Vec<Jet<S>> = (0..d).map(|i| Jet::variable(d, order, i, S::zero())).collect();
    let apply_inv = |w: &[Jet<S>]| -> Vec<Jet<S>> {
        (0..d)
            .map(|i| jet_sum(d, order, (0..d).map(|c| w[c].scale(&jac_inv[i][c]))))
            .collect()
    };
    // displacement u(v), zero constant term
    let mut u = apply_inv(&v);
    for _ in 1..order {
        let nl = remainder.iter().map(|r| r.substitute(&u)).collect::<Result<Vec<_>>>()?;
        let rhs: Vec<Jet<S>> = v.iter().zip(&nl).map(|(a, b)| a - b).collect();
        u = apply_inv(&rhs);
    }
    Ok(u.iter().zip(domain_point).map(|(ui, x)| ui.add_constant(x)).collect())
}
