use super::Table21;
use crate::error::{Error, Result};
use crate::numkernel::{Jet, Scalar};

/// Covariant derivatives of a scalar at a point. `second[b][a]` is
/// `∇_b∇_a Q`, `third[c][b][a]` is `∇_c∇_b∇_a Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantDerivs<S: Scalar> {
    pub first: Vec<S>,
    pub second: Vec<Vec<S>>,
    pub third: Vec<Vec<Vec<S>>>,
}

/// `q` must be a jet of order at least 3 at the point, `gamma` the jets of
/// `Γ^k_ij` of order at least 1 at the same point.
pub fn covariant_derivs<S: Scalar>(q: &Jet<S>, gamma: &Table21<S>) -> Result<CovariantDerivs<S>> {
    let d = q.dim();
    if gamma.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: gamma.len() });
    }
    if q.order() < 3 {
        return Err(Error::InsufficientOrder { needed: 3, have: q.order() });
    }
    let g_order = gamma.iter().flatten().flatten().map(Jet::order).min().unwrap_or(1);
    if g_order < 1 {
        return Err(Error::InsufficientOrder { needed: 1, have: g_order });
    }
    let q = q.truncate(3);
    let gamma: Table21<S> =
        gamma.iter().map(|gk| gk.iter().map(|gi| gi.iter().map(|j| j.truncate(1)).collect()).collect()).collect();

    let d1: Vec<Jet<S>> = q.gradient()?.into_iter().map(|j| j.truncate(1)).collect();
    let mut d2 = vec![vec![Jet::zero(d, 1); d]; d];
    for b in 0..d {
        for a in 0..d {
            let mut v = q.partial(a)?.partial(b)?;
            for c in 0..d {
                v = &v - &(&gamma[c][b][a] * &d1[c]);
            }
            d2[b][a] = v;
        }
    }
    let mut third = vec![vec![vec![S::zero(); d]; d]; d];
    for c in 0..d {
        for b in 0..d {
            for a in 0..d {
                let mut v = d2[b][a].partial(c)?.value();
                for e in 0..d {
                    v = v - gamma[e][c][b].value() * d2[e][a].value()
                        - gamma[e][c][a].value() * d2[b][e].value();
                }
                third[c][b][a] = v;
            }
        }
    }
    Ok(CovariantDerivs {
        first: d1.iter().map(Jet::value).collect(),
        second: d2.iter().map(|r| r.iter().map(Jet::value).collect()).collect(),
        third,
    })
}
