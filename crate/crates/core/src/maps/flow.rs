//! Vector fields and their time-t flows.

use std::fmt;
use std::sync::Arc;

use super::DiffeoMap;
use crate::error::{Error, Result};
use crate::numkernel::{jet_sum, Jet, Poly, Scalar};

pub trait VectorField<S: Scalar>: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Jets of the components `X^i` at `point`.
    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>>;

    fn label(&self) -> String {
        format!("{self:?}")
    }
}

pub type VectorFieldRef<S> = Arc<dyn VectorField<S>>;

#[derive(Clone)]
pub struct PolyVectorField<S: Scalar> {
    pub components: Vec<Poly<S>>,
}

impl<S: Scalar> fmt::Debug for PolyVectorField<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.components.iter().map(|p| p.as_jet())).finish()
    }
}

impl<S: Scalar> PolyVectorField<S> {
    pub fn new(components: Vec<Poly<S>>) -> Result<Self> {
        let n = components.len();
        if let Some(bad) = components.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
        }
        Ok(PolyVectorField { components })
    }

    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize, degree: usize) -> Self {
        PolyVectorField { components: (0..dim).map(|_| Poly::random(rng, dim, degree, 0.6)).collect() }
    }
}

impl<S: Scalar> VectorField<S> for PolyVectorField<S> {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>> {
        self.components.iter().map(|p| p.jet_at(point, order)).collect()
    }
}

/// `[X, Y]^k = X^a ∂_a Y^k - Y^a ∂_a X^k`.
#[derive(Debug, Clone)]
pub struct Bracket<S: Scalar> {
    pub x: VectorFieldRef<S>,
    pub y: VectorFieldRef<S>,
}

impl<S: Scalar> VectorField<S> for Bracket<S> {
    fn dim(&self) -> usize {
        self.x.dim()
    }

    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>> {
        let n = self.dim();
        let xj = self.x.jets(point, order + 1)?;
        let yj = self.y.jets(point, order + 1)?;
        (0..n)
            .map(|k| {
                let dy = yj[k].gradient()?;
                let dx = xj[k].gradient()?;
                let terms = (0..n).map(|a| &(&xj[a] * &dy[a]) - &(&yj[a] * &dx[a]));
                Ok(jet_sum(n, order, terms))
            })
            .collect()
    }
}

/// Time-`t` flow of a vector field, integrated on jets with classical RK4.
#[derive(Debug, Clone)]
pub struct FlowMap<S: Scalar> {
    pub field: VectorFieldRef<S>,
    pub t: S,
    pub steps: usize,
}

pub const DEFAULT_FLOW_STEPS: usize = 64;

pub fn flow_map<S: Scalar>(field: &VectorFieldRef<S>, t: S, steps: usize) -> Result<FlowMap<S>> {
    if steps == 0 {
        return Err(Error::StepUnderflow(0.0));
    }
    let h = t.to_f64() / steps as f64;
    if !t.is_zero() && h.abs() < 1e-14 * t.magnitude().max(1.0) {
        return Err(Error::StepUnderflow(h));
    }
    Ok(FlowMap { field: field.clone(), t, steps })
}

impl<S: Scalar> FlowMap<S> {
    fn rhs(&self, phi: &[Jet<S>]) -> Result<Vec<Jet<S>>> {
        let at: Vec<S> = phi.iter().map(Jet::value).collect();
        let order = phi[0].order();
        let x = self.field.jets(&at, order)?;
        x.iter().map(|xi| xi.compose(phi)).collect()
    }
}

fn axpy<S: Scalar>(a: &[Jet<S>], s: &S, b: &[Jet<S>]) -> Vec<Jet<S>> {
    a.iter().zip(b).map(|(x, y)| x + &y.scale(s)).collect()
}

impl<S: Scalar> DiffeoMap<S> for FlowMap<S> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn label(&self) -> String {
        format!("flow({}, t={})", self.field.label(), self.t)
    }

    fn jets(&self, point: &[S], order: usize) -> Result<Vec<Jet<S>>> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: point.len() });
        }
        let h = self.t.clone() / S::from_i64(self.steps as i64);
        let half = h.clone() / S::from_i64(2);
        let sixth = h.clone() / S::from_i64(6);
        let two = S::from_i64(2);
        let mut phi = Jet::identity(point, order);
        for _ in 0..self.steps {
            let k1 = self.rhs(&phi)?;
            let k2 = self.rhs(&axpy(&phi, &half, &k1))?;
            let k3 = self.rhs(&axpy(&phi, &half, &k2))?;
            let k4 = self.rhs(&axpy(&phi, &h, &k3))?;
            let incr: Vec<Jet<S>> = (0..phi.len())
                .map(|i| &(&(&k1[i] + &k2[i].scale(&two)) + &k3[i].scale(&two)) + &k4[i])
                .collect();
            phi = axpy(&phi, &sixth, &incr);
        }
        Ok(phi)
    }

    fn preimage(&self, y: &[S]) -> Result<Vec<S>> {
        let back = FlowMap { field: self.field.clone(), t: -self.t.clone(), steps: self.steps };
        back.apply(y)
    }

    fn orientation_preserving(&self) -> Option<bool> {
        Some(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_field_flow_is_exponential() {
        let x: VectorFieldRef<f64> = Arc::new(PolyVectorField::new(vec![Poly::var(1, 0)]).unwrap());
        let f = flow_map(&x, 0.5, DEFAULT_FLOW_STEPS).unwrap();
        let j = f.jets(&[2.0], 3).unwrap();
        let e = 0.5f64.exp();
        assert!((j[0].value() - 2.0 * e).abs() < 1e-10);
        assert!((j[0].coeffs()[1] - e).abs() < 1e-10);
        assert!(j[0].coeffs()[2].abs() < 1e-12);
    }

    #[test]
    fn zero_steps_underflow() {
        let x: VectorFieldRef<f64> = Arc::new(PolyVectorField::new(vec![Poly::var(1, 0)]).unwrap());
        assert!(matches!(flow_map(&x, 1.0, 0), Err(Error::StepUnderflow(_))));
    }
}
