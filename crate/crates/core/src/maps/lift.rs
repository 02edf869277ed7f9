//! Symplectic lift of a base map to the cotangent bundle.

use std::sync::Arc;

use super::{DiffeoMap, MapRef};
use crate::error::{Error, Result};
use crate::numkernel::linalg::{jacobian_jets, jacobian_values, jet_matrix_inverse, mat_mul, mat_vec, transpose, Matrix};
use crate::numkernel::{jet_sum, Jet, Scalar};

/// `f̃(x, ξ) = (f(x), (Df)^{-T} ξ)` on `T*M`.
#[derive(Debug, Clone)]
pub struct CotangentMap<S: Scalar> {
    pub base: MapRef<S>,
}

pub fn cotangent_lift<S: Scalar>(f: &MapRef<S>) -> MapRef<S> {
    Arc::new(CotangentMap { base: f.clone() })
}

impl<S: Scalar> DiffeoMap<S> for CotangentMap<S> {
    fn dim(&self) -> usize {
        2 * self.base.dim()
    }

    fn label(&self) -> String {
        format!("lift({})", self.base.label())
    }

    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>> {
        let n = self.base.dim();
        if point.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: point.len() });
        }
        let (x, xi) = point.split_at(n);
        let fj = self.base.jets(x, order + 1)?;
        let jac = jacobian_jets(&fj)?;
        let jinv = jet_matrix_inverse(&jac).ok_or(Error::SingularJacobian)?;
        let base_axes: Vec<usize> = (0..n).collect();
        let mut out: Vec<Jet<S>> =
            fj.iter().map(|f| f.truncate(order).embed(2 * n, &base_axes)).collect();
        let xi_jets: Vec<Jet<S>> =
            (0..n).map(|i| Jet::variable(2 * n, order, n + i, xi[i].clone())).collect();
        for j in 0..n {
            // ξ'_j = (Df^{-1})^i_j ξ_i
            let terms = (0..n).map(|i| &jinv[i][j].embed(2 * n, &base_axes) * &xi_jets[i]);
            out.push(jet_sum(2 * n, order, terms));
        }
        Ok(out)
    }

    fn preimage(&self, y: &[S]) -> Result<Vec<S>> {
        let n = self.base.dim();
        if y.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: y.len() });
        }
        let x = self.base.preimage(&y[..n])?;
        let jac = jacobian_values(&self.base.jets(&x, 1)?);
        let mut out = x;
        out.extend(mat_vec(&transpose(&jac), &y[n..]));
        Ok(out)
    }

    fn orientation_preserving(&self) -> Option<bool> {
        Some(true)
    }
}

/// Standard symplectic matrix `[[0, I], [-I, 0]]` on `ℝ^{2n}`.
pub fn symplectic_form<S: Scalar>(n: usize) -> Matrix<S> {
    let mut m = vec![vec![S::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        m[i][n + i] = S::one();
        m[n + i][i] = -S::one();
    }
    m
}

/// `Jᵀ Ω J - Ω` for the Jacobian of a map on `ℝ^{2n}`.
pub fn symplectic_residual<S: Scalar>(jac: &Matrix<S>) -> Matrix<S> {
    let n = jac.len() / 2;
    let omega = symplectic_form::<S>(n);
    let lhs = mat_mul(&mat_mul(&transpose(jac), &omega), jac);
    lhs.iter()
        .zip(&omega)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect())
        .collect()
}
