//! Exact multivariate polynomials and jet-evaluable scalar functions.

use std::fmt;

use rand::Rng;

use super::jet::Jet;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// A scalar function that can produce its truncated Taylor expansion at any
/// point of its chart.
pub trait JetFunction<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;
    fn jet(&self, point: &[S], order: usize) -> Result<Jet<S>>;

    fn value(&self, point: &[S]) -> Result<S> {
        Ok(self.jet(point, 0)?.value())
    }
}

/// A polynomial, stored as its (exact) expansion at the origin.
#[derive(Clone, PartialEq)]
pub struct Poly<S: Scalar> {
    jet: Jet<S>,
}

impl<S: Scalar> fmt::Debug for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({:?})", self.jet)
    }
}

impl<S: Scalar> Poly<S> {
    pub fn zero(dim: usize) -> Self {
        Poly { jet: Jet::zero(dim, 0) }
    }

    pub fn constant(dim: usize, c: S) -> Self {
        Poly { jet: Jet::constant(dim, 0, c) }
    }

    pub fn var(dim: usize, axis: usize) -> Self {
        Poly { jet: Jet::variable(dim, 1, axis, S::zero()) }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u8>, S)>>(dim: usize, terms: I) -> Self {
        let terms: Vec<(Vec<u8>, S)> = terms.into_iter().collect();
        let degree =
            terms.iter().map(|(e, _)| e.iter().map(|&v| v as usize).sum::<usize>()).max().unwrap_or(0);
        Poly { jet: Jet::from_terms(dim, degree, terms) }.normalized()
    }

    /// Interprets an origin-based jet as an exact polynomial.
    pub fn from_jet(jet: Jet<S>) -> Self {
        Poly { jet }.normalized()
    }

    fn normalized(self) -> Self {
        let d = self.jet.degree().unwrap_or(0);
        Poly { jet: self.jet.truncate(d) }
    }

    pub fn dim(&self) -> usize {
        self.jet.dim()
    }

    pub fn degree(&self) -> Option<usize> {
        self.jet.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.jet.is_zero()
    }

    pub fn as_jet(&self) -> &Jet<S> {
        &self.jet
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &S)> {
        self.jet.terms().filter(|(_, c)| !c.is_zero())
    }

    pub fn coeff(&self, exps: &[u8]) -> S {
        self.jet.coeff(exps)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.jet.order().max(other.jet.order());
        Poly { jet: &self.jet.raise(order) + &other.jet.raise(order) }.normalized()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Poly { jet: -&self.jet }
    }

    pub fn scale(&self, s: &S) -> Self {
        Poly { jet: self.jet.scale(s) }.normalized()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.jet.order() + other.jet.order();
        Poly { jet: &self.jet.raise(order) * &other.jet.raise(order) }.normalized()
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Poly::constant(self.dim(), S::one()), |acc, _| acc.mul(self))
    }

    pub fn partial(&self, axis: usize) -> Result<Self> {
        if self.jet.order() == 0 {
            if axis >= self.dim() {
                return Err(Error::AxisOutOfRange { axis, dim: self.dim() });
            }
            return Ok(Poly::zero(self.dim()));
        }
        Ok(Poly { jet: self.jet.partial(axis)? }.normalized())
    }

    /// Substitutes polynomials for the variables.
    pub fn substitute(&self, inners: &[Poly<S>]) -> Result<Self> {
        let inner_deg = inners.iter().map(|p| p.jet.order()).max().unwrap_or(0);
        let total = self.jet.order() * inner_deg.max(1);
        let raised: Vec<Jet<S>> = inners.iter().map(|p| p.jet.raise(total)).collect();
        Ok(Poly { jet: self.jet.substitute(&raised)? }.normalized())
    }

    /// Re-expresses the polynomial in `new_dim` variables.
    pub fn embed(&self, new_dim: usize, axes: &[usize]) -> Self {
        Poly { jet: self.jet.embed(new_dim, axes) }
    }

    pub fn eval(&self, point: &[S]) -> Result<S> {
        Ok(self.jet_at(point, 0)?.value())
    }

    /// Taylor expansion at `point`, truncated at `order`.
    pub fn jet_at(&self, point: &[S], order: usize) -> Result<Jet<S>> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: point.len() });
        }
        self.jet.substitute(&Jet::identity(point, order))
    }

    /// Random polynomial with small rational coefficients and total degree
    /// at most `degree`; each monomial is present with probability `density`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, degree: usize, density: f64) -> Self {
        let base: Jet<S> = Jet::zero(dim, degree);
        let mut terms: Vec<(Vec<u8>, S)> = Vec::new();
        for e in base.exponents() {
            if rng.gen_bool(density) {
                terms.push((e.clone(), small_rational(rng)));
            }
        }
        if terms.is_empty() {
            return Poly::zero(dim);
        }
        Poly { jet: Jet::from_terms(dim, degree, terms) }.normalized()
    }
}

/// A nonzero rational `p/q` with `|p| <= 5`, `1 <= q <= 4`.
pub fn small_rational<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> S {
    let mut p: i64 = rng.gen_range(-5..=4);
    if p >= 0 {
        p += 1;
    }
    let q: i64 = rng.gen_range(1..=4);
    S::from_ratio(p, q)
}

impl<S: Scalar> JetFunction<S> for Poly<S> {
    fn dim(&self) -> usize {
        Poly::dim(self)
    }

    fn jet(&self, point: &[S], order: usize) -> Result<Jet<S>> {
        self.jet_at(point, order)
    }
}
