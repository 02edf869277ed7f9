use std::fmt;
use std::sync::Arc;

use super::{LocalDiffOp, MAX_OP_ORDER};
use crate::error::{Error, Result};
use crate::maps::{cotangent_lift, MapRef};
use crate::numkernel::poly::JetFunction;
use crate::numkernel::{jet_invert, Jet, Scalar};

/// `f*Q = Q ∘ f̃⁻¹`.
#[derive(Clone)]
pub struct Transported<S: Scalar> {
    pub lift: MapRef<S>,
    pub function: Arc<dyn JetFunction<S>>,
}

impl<S: Scalar> fmt::Debug for Transported<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transported({})", self.lift.label())
    }
}

pub fn act_on_function<S: Scalar>(f: &MapRef<S>, q: Arc<dyn JetFunction<S>>) -> Result<Transported<S>> {
    if q.dim() != 2 * f.dim() {
        return Err(Error::DimensionMismatch { expected: 2 * f.dim(), found: q.dim() });
    }
    Ok(Transported { lift: cotangent_lift(f), function: q })
}

impl<S: Scalar> JetFunction<S> for Transported<S> {
    fn dim(&self) -> usize {
        self.lift.dim()
    }

    fn jet(&self, point: &[S], order: usize) -> Result<Jet<S>> {
        let y = self.lift.preimage(point)?;
        let inv = jet_invert(&self.lift.jets(&y, order.max(1))?, &y)?;
        let inv: Vec<Jet<S>> = inv.iter().map(|j| j.truncate(order)).collect();
        self.function.jet(&y, order)?.compose(&inv)
    }
}

/// `f*T = f* ∘ T ∘ (f⁻¹)*`, living at `f̃(T.point)`.
pub fn act_on_operator<S: Scalar>(f: &MapRef<S>, t: &LocalDiffOp<S>) -> Result<LocalDiffOp<S>> {
    let lift = cotangent_lift(f);
    let phi = lift.jets(t.point(), MAX_OP_ORDER)?;
    let image: Vec<S> = phi.iter().map(Jet::value).collect();
    t.transport(&phi, &image)
}

/// `h̃^♯ T = h̃^♯ ∘ T ∘ (h̃⁻¹)^♯` with `h̃^♯Q = Q ∘ h̃`: takes `T` at `h̃(p)` to an
/// operator at `p`. Equals the action of `h⁻¹`.
pub fn pullback_operator<S: Scalar>(h: &MapRef<S>, t: &LocalDiffOp<S>, p: &[S]) -> Result<LocalDiffOp<S>> {
    let lift = cotangent_lift(h);
    let hj = lift.jets(p, MAX_OP_ORDER)?;
    let image: Vec<S> = hj.iter().map(Jet::value).collect();
    let matches = image.iter().zip(t.point()).all(|(a, b)| a.approx_eq(b, 1e-12));
    if image.len() != t.point().len() || !matches {
        return Err(Error::Domain("operator does not live at the image point".into()));
    }
    let inv = jet_invert(&hj, p)?;
    t.transport(&inv, p)
}
