use rayon::prelude::*;

use super::{connection_cocycle, divergence_cocycle, lie_derivative_connection, log_volume_cocycle, point_strings};
use super::{CaseResult, Report};
use crate::error::Result;
use crate::geometry::{table_values, ConnectionRef};
use crate::maps::{catalog_get, flow_map, MapRef, VectorFieldRef, DEFAULT_FLOW_STEPS};

/// Residuals below this are treated as converged regardless of the ratio test.
pub const CONSISTENCY_FLOOR: f64 = 1e-10;

/// A group cocycle and its derivative at the identity.
#[derive(Debug, Clone)]
pub enum ConsistencyPair {
    /// `log det Df` against `div X`.
    LogVolume,
    /// `f*Γ - Γ` against `L_X Γ`.
    Connection(ConnectionRef<f64>),
}

impl ConsistencyPair {
    pub fn name(&self) -> &'static str {
        match self {
            ConsistencyPair::LogVolume => "log_volume/divergence",
            ConsistencyPair::Connection(_) => "connection/lie_derivative",
        }
    }

    fn group(&self, f: &MapRef<f64>, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            ConsistencyPair::LogVolume => Ok(vec![log_volume_cocycle(f, x)?]),
            ConsistencyPair::Connection(g) => {
                let t = table_values(&connection_cocycle(f, g)?.components(x, 0)?);
                Ok(t.into_iter().flatten().flatten().collect())
            }
        }
    }

    fn algebra(&self, field: &VectorFieldRef<f64>, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            ConsistencyPair::LogVolume => Ok(vec![divergence_cocycle(field.as_ref(), x, &1.0, None)?]),
            ConsistencyPair::Connection(g) => {
                Ok(lie_derivative_connection(field.as_ref(), g, x)?.into_iter().flatten().flatten().collect())
            }
        }
    }
}

fn difference_residual(pair: &ConsistencyPair, field: &VectorFieldRef<f64>, t: f64, x: &[f64]) -> Result<f64> {
    let id: MapRef<f64> = catalog_get("identity", &serde_json::json!({}), field.dim())?;
    let flow: MapRef<f64> = std::sync::Arc::new(flow_map(field, t, DEFAULT_FLOW_STEPS)?);
    let at_t = pair.group(&flow, x)?;
    let at_0 = pair.group(&id, x)?;
    let alg = pair.algebra(field, x)?;
    Ok(at_t.iter().zip(&at_0).zip(&alg).map(|((a, b), c)| ((a - b) / t - c).abs()).fold(0.0, f64::max))
}

/// Compares `(c(φ_t) - c(id))/t` with `ĉ(X)` at `x`, returning the residual
/// and whether it passes: below [`CONSISTENCY_FLOOR`], or halving (ratio in
/// `[0.35, 0.65]`) when `t` is halved.
pub fn consistency_case(pair: &ConsistencyPair, field: &VectorFieldRef<f64>, t: f64, x: &[f64]) -> Result<(f64, bool)> {
    let full = difference_residual(pair, field, t, x)?;
    if full <= CONSISTENCY_FLOOR {
        return Ok((full, true));
    }
    let half = difference_residual(pair, field, t / 2.0, x)?;
    Ok((full, (0.35..=0.65).contains(&(half / full))))
}

pub fn group_algebra_consistency(
    field: &VectorFieldRef<f64>,
    pair: &ConsistencyPair,
    t: f64,
    points: &[Vec<f64>],
) -> Report {
    let cases = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let outcome = consistency_case(pair, field, t, x);
            CaseResult::from_outcome(format!("{}#{i}", pair.name()), vec![field.label()], point_strings(x), outcome)
        })
        .collect();
    Report { cases }
}
