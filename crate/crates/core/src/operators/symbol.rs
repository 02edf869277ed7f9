use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use super::LocalDiffOp;
use crate::error::{Error, Result};
use crate::numkernel::linalg::inverse;
use crate::numkernel::monomials::table;
use crate::numkernel::poly::JetFunction;
use crate::numkernel::{Jet, Poly, Scalar};

/// A function on `T*M` polynomial in the fiber: `Σ_μ P_μ(x) ξ^μ`.
#[derive(Clone, PartialEq)]
pub struct Symbol<S: Scalar> {
    n: usize,
    terms: BTreeMap<Vec<u8>, Poly<S>>,
}

impl<S: Scalar> fmt::Debug for Symbol<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(k, v)| (k, v.as_jet()))).finish()
    }
}

impl<S: Scalar> Symbol<S> {
    pub fn zero(n: usize) -> Self {
        Symbol { n, terms: BTreeMap::new() }
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    /// Adds `coeff(x) ξ^μ`.
    pub fn add_term(&mut self, mu: &[u8], coeff: Poly<S>) -> Result<()> {
        if mu.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: mu.len() });
        }
        if coeff.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: coeff.dim() });
        }
        let sum = match self.terms.get(mu) {
            Some(p) => p.add(&coeff),
            None => coeff,
        };
        if sum.is_zero() {
            self.terms.remove(mu);
        } else {
            self.terms.insert(mu.to_vec(), sum);
        }
        Ok(())
    }

    pub fn coeff(&self, mu: &[u8]) -> Poly<S> {
        self.terms.get(mu).cloned().unwrap_or_else(|| Poly::zero(self.n))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &Poly<S>)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Fiber degree; `None` for the zero symbol.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|mu| mu.iter().map(|&e| e as usize).sum()).max()
    }

    /// Splits a polynomial in `(x, ξ)` by fiber monomial.
    pub fn from_poly(n: usize, p: &Poly<S>) -> Result<Self> {
        if p.dim() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: p.dim() });
        }
        let mut out = Symbol::zero(n);
        for (e, c) in p.terms() {
            let (xe, mu) = e.split_at(n);
            out.add_term(mu, Poly::from_terms(n, [(xe.to_vec(), c.clone())]))?;
        }
        Ok(out)
    }

    pub fn to_poly(&self) -> Poly<S> {
        let big = 2 * self.n;
        let base_axes: Vec<usize> = (0..self.n).collect();
        let mut acc = Poly::zero(big);
        for (mu, c) in &self.terms {
            let mut e = vec![0u8; big];
            e[self.n..].copy_from_slice(mu);
            let mono = Poly::from_terms(big, [(e, S::one())]);
            acc = acc.add(&c.embed(big, &base_axes).mul(&mono));
        }
        acc
    }

    /// Homogeneous symbol of fiber degree `k` with polynomial coefficients of
    /// degree at most `coeff_degree`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, coeff_degree: usize) -> Self {
        let mut out = Symbol::zero(n);
        for mu in table(n, k).exps.iter().filter(|e| e.iter().map(|&v| v as usize).sum::<usize>() == k) {
            let c = Poly::random(rng, n, coeff_degree, 0.6);
            out.add_term(mu, c).expect("matching dimensions");
        }
        if out.is_zero() {
            let mut mu = vec![0u8; n];
            mu[0] = k as u8;
            out.add_term(&mu, Poly::constant(n, S::one())).expect("matching dimensions");
        }
        out
    }
}

impl<S: Scalar> JetFunction<S> for Symbol<S> {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn jet(&self, point: &[S], order: usize) -> Result<Jet<S>> {
        self.to_poly().jet_at(point, order)
    }
}

/// Fiber degree bound for the coefficients of the operator fields built in
/// this crate.
pub const FIBER_DEGREE: usize = 3;

/// `ξ ↦ T(x, ξ)(P)` as a symbol over the base point `x`, for an operator
/// field `op_at` that yields the operator at each `(x, ξ)` and whose
/// coefficients are polynomials of degree at most [`FIBER_DEGREE`] in `ξ`.
///
/// The coefficients of the result are constants (values at `x`).
pub fn apply_op_to_symbol<S, F>(op_at: F, p: &Symbol<S>, x: &[S]) -> Result<Symbol<S>>
where
    S: Scalar,
    F: Fn(&[S]) -> Result<LocalDiffOp<S>>,
{
    let n = p.base_dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    FiberOperator::sample(op_at, x, FIBER_DEGREE)?.apply_to_symbol(p)
}

/// An operator field over a fixed base point `x` whose coefficients are
/// polynomials in `ξ`, recovered by interpolation on a tensor grid. The
/// degree bound is checked at an off-grid point when sampling.
pub struct FiberOperator<S: Scalar> {
    x: Vec<S>,
    /// Coefficient of each `∂^α`, as a polynomial on `T*M` free of `x`.
    coeffs: BTreeMap<Vec<u8>, Poly<S>>,
}

impl<S: Scalar> FiberOperator<S> {
    pub fn sample<F>(op_at: F, x: &[S], deg: usize) -> Result<Self>
    where
        F: Fn(&[S]) -> Result<LocalDiffOp<S>>,
    {
        let n = x.len();
        let nodes: Vec<S> = (0..=deg).map(|j| S::from_ratio(2 * j as i64 - deg as i64, 2)).collect();
        let vander: Vec<Vec<S>> = nodes
            .iter()
            .map(|t| (0..=deg).scan(S::one(), |acc, _| {
                let cur = acc.clone();
                *acc = acc.clone() * t.clone();
                Some(cur)
            }).collect())
            .collect();
        let vinv = inverse(&vander).ok_or_else(|| Error::Interpolation("singular Vandermonde matrix".into()))?;

        let grid = tensor_grid(n, deg + 1);
        let values = grid
            .iter()
            .map(|g| {
                let mut pt = x.to_vec();
                pt.extend(g.iter().map(|&i| nodes[i].clone()));
                op_at(&pt)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut raw: BTreeMap<Vec<u8>, BTreeMap<Vec<u8>, S>> = BTreeMap::new();
        for mu in &grid {
            let mono: Vec<u8> = std::iter::repeat_n(0, n).chain(mu.iter().map(|&m| m as u8)).collect();
            for (g, op) in grid.iter().zip(&values) {
                let w = mu.iter().zip(g).fold(S::one(), |acc, (&m, &gi)| acc * vinv[m][gi].clone());
                if w.is_zero() {
                    continue;
                }
                for (alpha, c) in op.terms() {
                    let slot = raw.entry(alpha.to_vec()).or_default().entry(mono.clone()).or_insert_with(S::zero);
                    *slot = slot.clone() + w.clone() * c.clone();
                }
            }
        }
        let coeffs = raw
            .into_iter()
            .map(|(alpha, terms)| (alpha, Poly::from_terms(2 * n, terms)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let out = FiberOperator { x: x.to_vec(), coeffs };

        let mut probe = x.to_vec();
        probe.extend((0..n).map(|a| S::from_ratio(2 * a as i64 + 3, 7)));
        let (want, got) = (op_at(&probe)?, out.at(&probe)?);
        if got.checked_sub(&want)?.max_abs() > 1e-9 * want.max_abs().max(1.0) {
            return Err(Error::Interpolation(format!("operator coefficients exceed degree {deg} in the fiber")));
        }
        Ok(out)
    }

    /// The operator at `point = (x, ξ)`; `x` must be the sampling base point.
    pub fn at(&self, point: &[S]) -> Result<LocalDiffOp<S>> {
        let n = self.x.len();
        if point.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: point.len() });
        }
        if point[..n] != self.x[..] {
            return Err(Error::Domain("fiber operator queried off its base point".into()));
        }
        let mut out = LocalDiffOp::zero(point);
        for (alpha, c) in &self.coeffs {
            out.add_term(alpha, c.eval(point)?)?;
        }
        Ok(out)
    }

    /// `Σ_α c_α(ξ) (∂^α P)(x, ξ)` as a symbol with constant coefficients.
    pub fn apply_to_symbol(&self, p: &Symbol<S>) -> Result<Symbol<S>> {
        let n = self.x.len();
        if p.base_dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.base_dim() });
        }
        let poly = p.to_poly();
        let at_x: Vec<Poly<S>> = (0..2 * n)
            .map(|a| if a < n { Poly::constant(2 * n, self.x[a].clone()) } else { Poly::var(2 * n, a) })
            .collect();
        let mut acc = Poly::zero(2 * n);
        for (alpha, c) in &self.coeffs {
            let mut d = poly.clone();
            for (axis, &e) in alpha.iter().enumerate() {
                for _ in 0..e {
                    d = d.partial(axis)?;
                }
            }
            if !d.is_zero() {
                acc = acc.add(&c.mul(&d.substitute(&at_x)?));
            }
        }
        Symbol::from_poly(n, &acc)
    }
}

fn tensor_grid(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..size).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}
