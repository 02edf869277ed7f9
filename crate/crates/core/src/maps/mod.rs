//! Diffeomorphisms of chart domains.
//!
//! Maps are never represented globally: a [`DiffeoMap`] only promises jets
//! of its component functions at the points where it is regular. Chart
//! points on `T*M` are ordered `(x^1..x^n, ξ_1..ξ_n)`; base axes come first,
//! fiber axes are `n..2n`.
//!
//! The cotangent lift uses the fiber convention `ξ'_j = (∂x^i/∂f^j) ξ_i`,
//! i.e. `ξ' = (Df)^{-T} ξ`, with `Df[a][i] = ∂f^a/∂x^i` (row = component).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkernel::linalg::{determinant, inverse, jacobian_values, mat_vec, Matrix};
use crate::numkernel::{jet_invert, Jet, Scalar};

pub mod catalog;
pub mod flow;
pub mod lift;

pub use catalog::{
    catalog_get, catalog_get_at, catalog_listing, catalog_map, sample_params, CatalogInfo, CatalogMap, PolyMap,
};
pub use flow::{flow_map, DEFAULT_FLOW_STEPS, Bracket, FlowMap, PolyVectorField, VectorField, VectorFieldRef};
pub use lift::{cotangent_lift, symplectic_form, symplectic_residual, CotangentMap};

pub trait DiffeoMap<S: Scalar>: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn label(&self) -> String;

    /// Jets of the component functions at `point`.
    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>>;

    fn apply(&self, point: &[S]) -> Result<Vec<S>> {
        Ok(self.jets(point, 0)?.iter().map(Jet::value).collect())
    }

    /// A point `x` near the regular region with `self(x) == y`.
    fn preimage(&self, y: &[S]) -> Result<Vec<S>> {
        newton_preimage(self, y)
    }

    /// Declared orientation behaviour: `Some(true)` when `det Df > 0` on the
    /// whole chart domain the map is used on.
    fn orientation_preserving(&self) -> Option<bool> {
        None
    }
}

pub type MapRef<S> = Arc<dyn DiffeoMap<S>>;

pub fn jacobian_at<S: Scalar>(map: &dyn DiffeoMap<S>, point: &[S]) -> Result<Matrix<S>> {
    Ok(jacobian_values(&map.jets(point, 1)?))
}

/// Fails with [`Error::SingularJacobian`] unless `map` is a local
/// diffeomorphism at `point`.
pub fn ensure_regular<S: Scalar>(map: &dyn DiffeoMap<S>, point: &[S]) -> Result<()> {
    let j = jacobian_at(map, point)?;
    if determinant(&j).is_zero() {
        Err(Error::SingularJacobian)
    } else {
        Ok(())
    }
}

/// Newton iteration for float backends; exact backends have no generic
/// preimage.
fn newton_preimage<S: Scalar, M: DiffeoMap<S> + ?Sized>(map: &M, y: &[S]) -> Result<Vec<S>> {
    if S::EXACT {
        return Err(Error::NoPreimage(format!(
            "{} has no closed-form inverse on the exact backend",
            map.label()
        )));
    }
    let mut x = y.to_vec();
    for _ in 0..60 {
        let jets = map.jets(&x, 1)?;
        let fx: Vec<S> = jets.iter().map(Jet::value).collect();
        let resid: Vec<S> = fx.iter().zip(y).map(|(a, b)| a.clone() - b.clone()).collect();
        let scale = y.iter().map(|v| v.magnitude()).fold(1.0, f64::max);
        if resid.iter().all(|r| r.magnitude() <= 1e-15 * scale) {
            return Ok(x);
        }
        let jinv = inverse(&jacobian_values(&jets)).ok_or(Error::SingularJacobian)?;
        let step = mat_vec(&jinv, &resid);
        x = x.iter().zip(step).map(|(a, s)| a.clone() - s).collect();
    }
    Err(Error::NoPreimage(format!("Newton iteration for {} did not converge", map.label())))
}

/// `f ∘ h`.
#[derive(Debug)]
pub struct Composed<S: Scalar> {
    pub outer: MapRef<S>,
    pub inner: MapRef<S>,
}

impl<S: Scalar> DiffeoMap<S> for Composed<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn label(&self) -> String {
        format!("({})∘({})", self.outer.label(), self.inner.label())
    }

    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>> {
        let inner = self.inner.jets(point, order)?;
        let mid: Vec<S> = inner.iter().map(Jet::value).collect();
        let outer = self.outer.jets(&mid, order)?;
        outer.iter().map(|o| o.compose(&inner)).collect()
    }

    fn apply(&self, point: &[S]) -> Result<Vec<S>> {
        self.outer.apply(&self.inner.apply(point)?)
    }

    fn preimage(&self, y: &[S]) -> Result<Vec<S>> {
        self.inner.preimage(&self.outer.preimage(y)?)
    }

    fn orientation_preserving(&self) -> Option<bool> {
        match (self.outer.orientation_preserving(), self.inner.orientation_preserving()) {
            (Some(a), Some(b)) => Some(a == b),
            _ => None,
        }
    }
}

pub fn compose<S: Scalar>(f: &MapRef<S>, h: &MapRef<S>) -> Result<MapRef<S>> {
    if f.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: h.dim() });
    }
    Ok(Arc::new(Composed { outer: f.clone(), inner: h.clone() }))
}

/// Local inverse of `f` near `f(anchor)`.
#[derive(Debug)]
pub struct LocalInverse<S: Scalar> {
    pub forward: MapRef<S>,
    pub anchor: Vec<S>,
    pub anchor_image: Vec<S>,
}

impl<S: Scalar> DiffeoMap<S> for LocalInverse<S> {
    fn dim(&self) -> usize {
        self.forward.dim()
    }

    fn label(&self) -> String {
        format!("({})⁻¹", self.forward.label())
    }

    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>> {
        let x = if point == self.anchor_image.as_slice() {
            self.anchor.clone()
        } else {
            self.forward.preimage(point)?
        };
        // one extra order is not needed: inversion preserves the order
        let fj = self.forward.jets(&x, order.max(1))?;
        let inv = jet_invert(&fj, &x)?;
        Ok(inv.into_iter().map(|j| j.truncate(order)).collect())
    }

    fn preimage(&self, y: &[S]) -> Result<Vec<S>> {
        self.forward.apply(y)
    }

    fn orientation_preserving(&self) -> Option<bool> {
        self.forward.orientation_preserving()
    }
}

/// Local inverse of `f`, defined near `f(at)`.
pub fn invert<S: Scalar>(f: &MapRef<S>, at: &[S]) -> Result<MapRef<S>> {
    ensure_regular(f.as_ref(), at)?;
    let image = f.apply(at)?;
    Ok(Arc::new(LocalInverse { forward: f.clone(), anchor: at.to_vec(), anchor_image: image }))
}
