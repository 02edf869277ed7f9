use std::sync::Arc;

use super::{pullback_connection, table_sub, zero_table, ConnectionRef, Table21, TensorField21, TensorRef};
use crate::error::{Error, Result};
use crate::maps::MapRef;
use crate::numkernel::linalg::{jacobian_jets, jet_matrix_inverse};
use crate::numkernel::{jet_sum, Jet, Scalar};

/// `C(F) = F*Γ - Γ`.
#[derive(Debug, Clone)]
pub struct CocycleC<S: Scalar> {
    pub map: MapRef<S>,
    pub connection: ConnectionRef<S>,
}

pub fn cocycle_c<S: Scalar>(map: &MapRef<S>, gamma: &ConnectionRef<S>) -> Result<TensorRef<S>> {
    if map.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch { expected: gamma.dim(), found: map.dim() });
    }
    Ok(Arc::new(CocycleC { map: map.clone(), connection: gamma.clone() }))
}

impl<S: Scalar> TensorField21<S> for CocycleC<S> {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn components(&self, point: &[S], order: usize) -> Result<Table21<S>> {
        let pulled = pullback_connection(&self.map, &self.connection)?.christoffel(point, order)?;
        let own = self.connection.christoffel(point, order)?;
        Ok(table_sub(&pulled, &own))
    }
}

/// `(H*T)^k_ij(p) = (J⁻¹)^k_c T^c_ab(H(p)) J^a_i J^b_j`.
#[derive(Debug, Clone)]
pub struct TensorPullback<S: Scalar> {
    pub map: MapRef<S>,
    pub tensor: TensorRef<S>,
}

pub fn tensor_pullback<S: Scalar>(map: &MapRef<S>, tensor: &TensorRef<S>) -> TensorRef<S> {
    Arc::new(TensorPullback { map: map.clone(), tensor: tensor.clone() })
}

impl<S: Scalar> TensorField21<S> for TensorPullback<S> {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn components(&self, point: &[S], order: usize) -> Result<Table21<S>> {
        let d = self.dim();
        let hj = self.map.jets(point, order + 1)?;
        let jac = jacobian_jets(&hj)?;
        let jinv = jet_matrix_inverse(&jac).ok_or(Error::SingularJacobian)?;
        let image: Vec<S> = hj.iter().map(Jet::value).collect();
        let inner: Vec<Jet<S>> = hj.iter().map(|j| j.truncate(order)).collect();
        let t = self.tensor.components(&image, order)?;
        let mut mid = zero_table(d, d, order);
        for c in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = Jet::zero(d, order);
                    for a in 0..d {
                        for b in 0..d {
                            if t[c][a][b].is_zero() {
                                continue;
                            }
                            let tc = t[c][a][b].compose(&inner)?;
                            acc = &acc + &(&(&tc * &jac[a][i]) * &jac[b][j]);
                        }
                    }
                    mid[c][i][j] = acc;
                }
            }
        }
        let mut out = zero_table(d, d, order);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    out[k][i][j] = jet_sum(d, order, (0..d).map(|c| &jinv[k][c] * &mid[c][i][j]));
                }
            }
        }
        Ok(out)
    }
}
