use rayon::prelude::*;

use super::{point_strings, CaseResult, Discrepancy, Report, Value};
use crate::error::{Error, Result};
use crate::geometry::{table_values, zero_table, ConnectionRef, Table21};
use crate::maps::{Bracket, VectorField, VectorFieldRef};
use crate::numkernel::monomials::{multi_factorial, table};
use crate::numkernel::poly::JetFunction;
use crate::numkernel::{jet_sum, Jet, Scalar};
use crate::operators::Symbol;

pub trait AlgebraCocycle<S: Scalar>: Send + Sync {
    fn name(&self) -> String;

    /// Whether the identity is sampled on `T*M`.
    fn on_cotangent(&self) -> bool {
        false
    }

    /// `c([X,Y])` and `X·c(Y) - Y·c(X)` at `point`.
    fn sides(&self, x: &VectorFieldRef<S>, y: &VectorFieldRef<S>, point: &[S]) -> Result<(Value<S>, Value<S>)>;

    fn discrepancy(&self, x: &VectorFieldRef<S>, y: &VectorFieldRef<S>, point: &[S]) -> Result<Discrepancy> {
        let (lhs, rhs) = self.sides(x, y, point)?;
        Discrepancy::between(&lhs, &rhs, &[&rhs])
    }
}

pub fn verify_algebra_cocycle<S: Scalar, C: AlgebraCocycle<S> + ?Sized>(
    c: &C,
    x: &VectorFieldRef<S>,
    y: &VectorFieldRef<S>,
    points: &[Vec<S>],
    tol: f64,
) -> Report {
    let cases = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let outcome = c.discrepancy(x, y, p).map(|d| (d.abs, d.passes(S::EXACT, tol)));
            CaseResult::from_outcome(format!("{}#{i}", c.name()), vec![x.label(), y.label()], point_strings(p), outcome)
        })
        .collect();
    Report { cases }
}

fn bracket<S: Scalar>(x: &VectorFieldRef<S>, y: &VectorFieldRef<S>) -> VectorFieldRef<S> {
    std::sync::Arc::new(Bracket { x: x.clone(), y: y.clone() })
}

/// Components of `[X,Y] + [Y,X]`; zero for a correct bracket.
pub fn bracket_antisymmetry_residual<S: Scalar>(
    x: &VectorFieldRef<S>,
    y: &VectorFieldRef<S>,
    point: &[S],
    order: usize,
) -> Result<Vec<Jet<S>>> {
    let a = bracket(x, y).jets(point, order)?;
    let b = bracket(y, x).jets(point, order)?;
    Ok(a.iter().zip(&b).map(|(u, v)| u + v).collect())
}

/// Components of `[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]`.
pub fn jacobi_residual<S: Scalar>(
    x: &VectorFieldRef<S>,
    y: &VectorFieldRef<S>,
    z: &VectorFieldRef<S>,
    point: &[S],
    order: usize,
) -> Result<Vec<Jet<S>>> {
    let terms = [
        bracket(x, &bracket(y, z)).jets(point, order)?,
        bracket(y, &bracket(z, x)).jets(point, order)?,
        bracket(z, &bracket(x, y)).jets(point, order)?,
    ];
    Ok((0..x.dim()).map(|k| &(&terms[0][k] + &terms[1][k]) + &terms[2][k]).collect())
}

fn divergence_jet<S: Scalar>(
    x: &dyn VectorField<S>,
    point: &[S],
    order: usize,
    a: &S,
    potential: Option<&dyn JetFunction<S>>,
) -> Result<Jet<S>> {
    let n = x.dim();
    let xj = x.jets(point, order + 1)?;
    let mut acc = Jet::zero(n, order);
    for (i, xi) in xj.iter().enumerate() {
        acc = &acc + &xi.partial(i)?.scale(a);
    }
    if let Some(phi) = potential {
        let grad = phi.jet(point, order + 1)?.gradient()?;
        for (xi, g) in xj.iter().zip(&grad) {
            acc = &acc + &(xi * g);
        }
    }
    Ok(acc)
}

/// `a ∂_iX^i + X^i ∂_iφ`: the divergence cocycle twisted by the closed form `dφ`.
pub fn divergence_cocycle<S: Scalar>(
    x: &dyn VectorField<S>,
    point: &[S],
    a: &S,
    potential: Option<&dyn JetFunction<S>>,
) -> Result<S> {
    divergence_jet(x, point, 0, a, potential).map(|j| j.value())
}

fn derivation<S: Scalar>(xj: &[Jet<S>], u: &Jet<S>) -> Result<Jet<S>> {
    let grad = u.gradient()?;
    let order = grad.first().map_or(0, Jet::order);
    Ok(jet_sum(u.dim(), order, xj.iter().zip(&grad).map(|(a, g)| a * g)))
}

#[derive(Debug, Clone)]
pub struct Divergence<S: Scalar> {
    pub a: S,
    pub potential: Option<crate::numkernel::Poly<S>>,
}

impl<S: Scalar> AlgebraCocycle<S> for Divergence<S> {
    fn name(&self) -> String {
        "divergence".into()
    }

    fn sides(&self, x: &VectorFieldRef<S>, y: &VectorFieldRef<S>, point: &[S]) -> Result<(Value<S>, Value<S>)> {
        let phi = self.potential.as_ref().map(|p| p as &dyn JetFunction<S>);
        let lhs = divergence_jet(bracket(x, y).as_ref(), point, 0, &self.a, phi)?.value();
        let cx = divergence_jet(x.as_ref(), point, 1, &self.a, phi)?;
        let cy = divergence_jet(y.as_ref(), point, 1, &self.a, phi)?;
        let xj = x.jets(point, 0)?;
        let yj = y.jets(point, 0)?;
        let rhs = derivation(&xj, &cy)?.value() - derivation(&yj, &cx)?.value();
        Ok((Value::Scalar(lhs), Value::Scalar(rhs)))
    }
}

fn lie_connection_jets<S: Scalar>(
    x: &dyn VectorField<S>,
    gamma: &ConnectionRef<S>,
    point: &[S],
    order: usize,
) -> Result<Table21<S>> {
    let n = x.dim();
    if gamma.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: gamma.dim() });
    }
    let xj = x.jets(point, order + 2)?;
    let dx: Vec<Vec<Jet<S>>> = xj.iter().map(Jet::gradient).collect::<Result<_>>()?;
    let ddx: Vec<Vec<Vec<Jet<S>>>> =
        dx.iter().map(|row| row.iter().map(Jet::gradient).collect::<Result<_>>()).collect::<Result<_>>()?;
    let g = gamma.christoffel(point, order + 1)?;
    let mut out = tensor_lie_derivative_jets(&xj, &dx, &g, order)?;
    for (k, outk) in out.iter_mut().enumerate() {
        for (i, row) in outk.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = &*slot + &ddx[k][i][j].truncate(order);
            }
        }
    }
    Ok(out)
}

/// `X^a∂_aT^k_ij - ∂_aX^k T^a_ij + ∂_iX^a T^k_aj + ∂_jX^a T^k_ia` to `order`,
/// given `T` to `order + 1`.
fn tensor_lie_derivative_jets<S: Scalar>(
    xj: &[Jet<S>],
    dx: &[Vec<Jet<S>>],
    t: &Table21<S>,
    order: usize,
) -> Result<Table21<S>> {
    let n = xj.len();
    let mut out = zero_table(n, n, order);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = derivation(xj, &t[k][i][j])?.truncate(order);
                for a in 0..n {
                    acc = &acc - &(&dx[k][a] * &t[a][i][j]);
                    acc = &acc + &(&dx[a][i] * &t[k][a][j]);
                    acc = &acc + &(&dx[a][j] * &t[k][i][a]);
                }
                out[k][i][j] = acc.truncate(order);
            }
        }
    }
    Ok(out)
}

/// `(L_X Γ)^k_ij` at `point`.
pub fn lie_derivative_connection<S: Scalar>(
    x: &dyn VectorField<S>,
    gamma: &ConnectionRef<S>,
    point: &[S],
) -> Result<Vec<Vec<Vec<S>>>> {
    lie_connection_jets(x, gamma, point, 0).map(|t| table_values(&t))
}

/// Lie derivative of a (2,1)-tensor given by its jets (order at least 1).
pub fn tensor_lie_derivative<S: Scalar>(x: &dyn VectorField<S>, t: &Table21<S>, point: &[S]) -> Result<Vec<Vec<Vec<S>>>> {
    let xj = x.jets(point, 1)?;
    let dx: Vec<Vec<Jet<S>>> = xj.iter().map(Jet::gradient).collect::<Result<_>>()?;
    tensor_lie_derivative_jets(&xj, &dx, t, 0).map(|t| table_values(&t))
}

#[derive(Debug, Clone)]
pub struct LieDerivativeConnection<S: Scalar> {
    pub gamma: ConnectionRef<S>,
}

impl<S: Scalar> AlgebraCocycle<S> for LieDerivativeConnection<S> {
    fn name(&self) -> String {
        "lie_connection".into()
    }

    fn sides(&self, x: &VectorFieldRef<S>, y: &VectorFieldRef<S>, point: &[S]) -> Result<(Value<S>, Value<S>)> {
        let lhs = lie_connection_jets(bracket(x, y).as_ref(), &self.gamma, point, 0)?;
        let cx = lie_connection_jets(x.as_ref(), &self.gamma, point, 1)?;
        let cy = lie_connection_jets(y.as_ref(), &self.gamma, point, 1)?;
        let a = tensor_lie_derivative(x.as_ref(), &cy, point)?;
        let b = tensor_lie_derivative(y.as_ref(), &cx, point)?;
        let rhs = Value::Tensor(a).combine(&Value::Tensor(b), -1)?;
        Ok((Value::Tensor(table_values(&lhs)), rhs))
    }
}

fn derivative_jet<S: Scalar>(j: &Jet<S>, alpha: &[u8]) -> Result<Jet<S>> {
    let mut out = j.clone();
    for (axis, &e) in alpha.iter().enumerate() {
        for _ in 0..e {
            out = out.partial(axis)?;
        }
    }
    Ok(out)
}

/// `P³(F, G) = g^{ii'} g^{jj'} g^{kk'} ∂_{ijk}F ∂_{i'j'k'}G` on jets over
/// `T*M`, to three orders below the inputs.
pub fn moyal_p3_jet<S: Scalar>(f: &Jet<S>, g: &Jet<S>) -> Result<Jet<S>> {
    let d = f.dim();
    if g.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: g.dim() });
    }
    if !d.is_multiple_of(2) {
        return Err(Error::Domain(format!("phase space of odd dimension {d}")));
    }
    let order = f.order().min(g.order());
    if order < 3 {
        return Err(Error::InsufficientOrder { needed: 3, have: order });
    }
    let n = d / 2;
    let mut acc = Jet::zero(d, order - 3);
    for alpha in table(d, 3).exps.iter().filter(|e| e.iter().map(|&v| v as usize).sum::<usize>() == 3) {
        // g^{i,n+i} = 1, g^{n+i,i} = -1: swap halves, sign (-1)^{fiber count}
        let mut partner = vec![0u8; d];
        partner[n..].copy_from_slice(&alpha[..n]);
        partner[..n].copy_from_slice(&alpha[n..]);
        let fiber: u32 = alpha[n..].iter().map(|&v| v as u32).sum();
        let mult = 6 / multi_factorial(alpha);
        let w = S::from_i64(if fiber.is_multiple_of(2) { mult } else { -mult });
        let df = derivative_jet(f, alpha)?;
        if df.is_zero() {
            continue;
        }
        let dg = derivative_jet(g, &partner)?;
        acc = &acc + &(&df * &dg).scale(&w);
    }
    Ok(acc)
}

pub fn moyal_p3<S: Scalar>(f: &dyn JetFunction<S>, g: &dyn JetFunction<S>, point: &[S]) -> Result<S> {
    moyal_p3_jet(&f.jet(point, 3)?, &g.jet(point, 3)?).map(|j| j.value())
}

/// `{F, G} = Σ ∂_{x_i}F ∂_{ξ_i}G - ∂_{ξ_i}F ∂_{x_i}G`.
pub fn poisson_jet<S: Scalar>(f: &Jet<S>, g: &Jet<S>) -> Result<Jet<S>> {
    let d = f.dim();
    if g.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: g.dim() });
    }
    let n = d / 2;
    let order = f.order().min(g.order());
    if order == 0 {
        return Err(Error::InsufficientOrder { needed: 1, have: 0 });
    }
    let mut acc = Jet::zero(d, order - 1);
    for i in 0..n {
        acc = &acc + &(&f.partial(i)? * &g.partial(n + i)?);
        acc = &acc - &(&f.partial(n + i)? * &g.partial(i)?);
    }
    Ok(acc)
}

/// `⟳ P³({F,G},H) - ⟳ {F, P³(G,H)}` at `point`.
pub fn chevalley_eilenberg_residual<S: Scalar>(
    f: &dyn JetFunction<S>,
    g: &dyn JetFunction<S>,
    h: &dyn JetFunction<S>,
    point: &[S],
) -> Result<S> {
    let jets = [f.jet(point, 4)?, g.jet(point, 4)?, h.jet(point, 4)?];
    let mut acc = S::zero();
    for r in 0..3 {
        let (a, b, c) = (&jets[r], &jets[(r + 1) % 3], &jets[(r + 2) % 3]);
        acc = acc + moyal_p3_jet(&poisson_jet(a, b)?, c)?.value();
        acc = acc - poisson_jet(a, &moyal_p3_jet(b, c)?)?.value();
    }
    Ok(acc)
}

/// Jets of `F_X = X^i(x) ξ_i` at a point of `T*M`.
pub fn hamiltonian_jets<S: Scalar>(x: &dyn VectorField<S>, point: &[S], order: usize) -> Result<Jet<S>> {
    let n = x.dim();
    if point.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: point.len() });
    }
    let base: Vec<usize> = (0..n).collect();
    let xj = x.jets(&point[..n], order)?;
    Ok(jet_sum(
        2 * n,
        order,
        xj.iter().enumerate().map(|(i, c)| &c.embed(2 * n, &base) * &Jet::variable(2 * n, order, n + i, point[n + i].clone())),
    ))
}

/// `P ↦ P³(X^i ξ_i, P)` at the base point `x`, as a symbol with constant
/// coefficients.
pub fn vect_embedding_cocycle<S: Scalar>(x: &dyn VectorField<S>, p: &Symbol<S>, at: &[S]) -> Result<Symbol<S>> {
    let n = p.base_dim();
    if x.dim() != n || at.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: at.len() });
    }
    let k = match p.degree() {
        Some(k) if k >= 2 => k,
        _ => return Ok(Symbol::zero(n)),
    };
    let mut point = at.to_vec();
    point.extend(std::iter::repeat_n(S::zero(), n));
    let fx = hamiltonian_jets(x, &point, k + 1)?;
    let out = moyal_p3_jet(&fx, &p.jet(&point, k + 1)?)?;
    let mut sym = Symbol::zero(n);
    for (e, c) in out.terms() {
        if e[..n].iter().all(|&v| v == 0) && !c.is_zero() {
            sym.add_term(&e[n..], crate::numkernel::Poly::constant(n, c.clone()))?;
        }
    }
    Ok(sym)
}

/// `X ↦ P³(F_X, ·)` probed on one function, with `X·Q = -{F_X, Q}`.
pub struct Vey<S: Scalar> {
    pub probe: std::sync::Arc<dyn JetFunction<S>>,
}

impl<S: Scalar> AlgebraCocycle<S> for Vey<S> {
    fn name(&self) -> String {
        "vey".into()
    }

    fn on_cotangent(&self) -> bool {
        true
    }

    fn sides(&self, x: &VectorFieldRef<S>, y: &VectorFieldRef<S>, point: &[S]) -> Result<(Value<S>, Value<S>)> {
        let p = self.probe.jet(point, 4)?;
        let fx = hamiltonian_jets(x.as_ref(), point, 4)?;
        let fy = hamiltonian_jets(y.as_ref(), point, 4)?;
        let fxy = hamiltonian_jets(bracket(x, y).as_ref(), point, 3)?;
        let lhs = moyal_p3_jet(&fxy, &p)?.value();
        // X·(c(Y)P) - c(Y)(X·P)
        let half = |fa: &Jet<S>, fb: &Jet<S>| -> Result<S> {
            let outer = -poisson_jet(fa, &moyal_p3_jet(fb, &p)?)?.value();
            let inner = moyal_p3_jet(fb, &-poisson_jet(fa, &p)?)?.value();
            Ok(outer - inner)
        };
        let rhs = half(&fx, &fy)? - half(&fy, &fx)?;
        Ok((Value::Scalar(lhs), Value::Scalar(rhs)))
    }
}
