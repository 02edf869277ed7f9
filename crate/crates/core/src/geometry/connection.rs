use std::fmt;
use std::sync::Arc;

use super::{is_symmetric, zero_table, Connection, ConnectionRef, Table21};
use crate::error::{Error, Result};
use crate::maps::MapRef;
use crate::numkernel::linalg::{jacobian_jets, jet_matrix_inverse};
use crate::numkernel::{jet_sum, Jet, Poly, Scalar};

/// The Euclidean connection, `Γ ≡ 0`.
#[derive(Debug, Clone)]
pub struct FlatConnection {
    pub dim: usize,
}

impl<S: Scalar> Connection<S> for FlatConnection {
    fn dim(&self) -> usize {
        self.dim
    }

    fn christoffel(&self, point: &[S], order: usize) -> Result<Table21<S>> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: point.len() });
        }
        Ok(zero_table(self.dim, self.dim, order))
    }
}

/// Symmetric connection with polynomial Christoffel symbols.
#[derive(Clone)]
pub struct PolyConnection<S: Scalar> {
    gamma: Vec<Vec<Vec<Poly<S>>>>,
}

impl<S: Scalar> fmt::Debug for PolyConnection<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyConnection(dim {})", self.gamma.len())
    }
}

impl<S: Scalar> PolyConnection<S> {
    pub fn new(gamma: Vec<Vec<Vec<Poly<S>>>>) -> Result<Self> {
        let d = gamma.len();
        for (k, gk) in gamma.iter().enumerate() {
            if gk.len() != d || gk.iter().any(|r| r.len() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: gk.len() });
            }
            for i in 0..d {
                for j in 0..i {
                    if gk[i][j] != gk[j][i] {
                        return Err(Error::Asymmetric(format!("Γ^{k}_{{{i}{j}}} != Γ^{k}_{{{j}{i}}}")));
                    }
                }
            }
            if let Some(p) = gk.iter().flatten().find(|p| p.dim() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
            }
        }
        Ok(PolyConnection { gamma })
    }

    /// Random symmetric connection with polynomial entries up to `degree`.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize, degree: usize, density: f64) -> Self {
        let mut gamma = vec![vec![vec![Poly::zero(dim); dim]; dim]; dim];
        for gk in gamma.iter_mut() {
            for i in 0..dim {
                for j in i..dim {
                    let p = Poly::random(rng, dim, degree, density);
                    gk[i][j] = p.clone();
                    gk[j][i] = p;
                }
            }
        }
        PolyConnection { gamma }
    }
}

impl<S: Scalar> Connection<S> for PolyConnection<S> {
    fn dim(&self) -> usize {
        self.gamma.len()
    }

    fn christoffel(&self, point: &[S], order: usize) -> Result<Table21<S>> {
        self.gamma
            .iter()
            .map(|gk| gk.iter().map(|gi| gi.iter().map(|p| p.jet_at(point, order)).collect()).collect())
            .collect()
    }
}

/// The canonical lift `Γ̃` of a base connection to `T*M`.
#[derive(Debug, Clone)]
pub struct LiftedConnection<S: Scalar> {
    pub base: ConnectionRef<S>,
}

pub fn lift_connection<S: Scalar>(gamma: &ConnectionRef<S>) -> ConnectionRef<S> {
    Arc::new(LiftedConnection { base: gamma.clone() })
}

impl<S: Scalar> Connection<S> for LiftedConnection<S> {
    fn dim(&self) -> usize {
        2 * self.base.dim()
    }

    fn christoffel(&self, point: &[S], order: usize) -> Result<Table21<S>> {
        let n = self.base.dim();
        let big = 2 * n;
        if point.len() != big {
            return Err(Error::DimensionMismatch { expected: big, found: point.len() });
        }
        let (x, xi) = point.split_at(n);
        let axes: Vec<usize> = (0..n).collect();
        let g1 = self.base.christoffel(x, order + 1)?;
        // Γ and ∂_m Γ re-expressed in the 2n chart variables
        let g: Vec<Vec<Vec<Jet<S>>>> = g1
            .iter()
            .map(|gk| gk.iter().map(|gi| gi.iter().map(|j| j.truncate(order).embed(big, &axes)).collect()).collect())
            .collect();
        let dg: Vec<Vec<Vec<Vec<Jet<S>>>>> = g1
            .iter()
            .map(|gk| {
                gk.iter()
                    .map(|gi| {
                        gi.iter()
                            .map(|j| Ok(j.gradient()?.iter().map(|d| d.embed(big, &axes)).collect()))
                            .collect::<Result<Vec<Vec<Jet<S>>>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let xi_j: Vec<Jet<S>> = (0..n).map(|a| Jet::variable(big, order, n + a, xi[a].clone())).collect();

        let mut out = zero_table(big, big, order);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[k][i][j] = g[k][i][j].clone();
                    let terms = (0..n).map(|a| {
                        let quad = jet_sum(big, order, (0..n).map(|t| &g[a][k][t] * &g[t][i][j]));
                        let lin = &(&(&dg[a][i][j][k] - &dg[a][j][k][i]) - &dg[a][i][k][j]) + &quad.scale(&S::from_i64(2));
                        &xi_j[a] * &lin
                    });
                    out[n + k][i][j] = jet_sum(big, order, terms);
                    out[n + k][i][n + j] = -&g[j][i][k];
                    out[n + k][n + i][j] = -&g[i][k][j];
                }
            }
        }
        Ok(out)
    }
}

/// `(F*Γ)^k_ij = (J⁻¹)^k_c [Γ^c_ab(F(x)) J^a_i J^b_j + ∂_i J^c_j]`.
#[derive(Debug, Clone)]
pub struct PulledBack<S: Scalar> {
    pub map: MapRef<S>,
    pub connection: ConnectionRef<S>,
}

pub fn pullback_connection<S: Scalar>(map: &MapRef<S>, gamma: &ConnectionRef<S>) -> Result<ConnectionRef<S>> {
    if map.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch { expected: gamma.dim(), found: map.dim() });
    }
    Ok(Arc::new(PulledBack { map: map.clone(), connection: gamma.clone() }))
}

impl<S: Scalar> Connection<S> for PulledBack<S> {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn christoffel(&self, point: &[S], order: usize) -> Result<Table21<S>> {
        let d = self.dim();
        let fj = self.map.jets(point, order + 2)?;
        let jac2 = jacobian_jets(&fj)?;
        let jac: Vec<Vec<Jet<S>>> = jac2.iter().map(|r| r.iter().map(|j| j.truncate(order)).collect()).collect();
        let jinv = jet_matrix_inverse(&jac).ok_or(Error::SingularJacobian)?;
        let image: Vec<S> = fj.iter().map(Jet::value).collect();
        let inner: Vec<Jet<S>> = fj.iter().map(|j| j.truncate(order)).collect();
        let gamma_f = self.connection.christoffel(&image, order)?;
        let gamma_f: Table21<S> = gamma_f
            .iter()
            .map(|gc| gc.iter().map(|ga| ga.iter().map(|j| j.compose(&inner)).collect::<Result<_>>()).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        // ∂_i J^c_j
        let djac: Vec<Vec<Vec<Jet<S>>>> = jac2
            .iter()
            .map(|row| row.iter().map(|j| j.gradient()).collect::<Result<_>>())
            .collect::<Result<_>>()?;

        let mut inner_t = zero_table(d, d, order);
        for c in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = djac[c][j][i].clone();
                    for a in 0..d {
                        for b in 0..d {
                            if gamma_f[c][a][b].is_zero() {
                                continue;
                            }
                            acc = &acc + &(&(&gamma_f[c][a][b] * &jac[a][i]) * &jac[b][j]);
                        }
                    }
                    inner_t[c][i][j] = acc;
                }
            }
        }
        let mut out = zero_table(d, d, order);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    out[k][i][j] = jet_sum(d, order, (0..d).map(|c| &jinv[k][c] * &inner_t[c][i][j]));
                }
            }
        }
        debug_assert!(!S::EXACT || is_symmetric(&out, 0.0));
        Ok(out)
    }
}
