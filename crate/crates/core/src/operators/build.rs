use super::LocalDiffOp;
use crate::error::{Error, Result};
use crate::geometry::{cocycle_c, lift_connection, table_values, ConnectionRef, Table21};
use crate::maps::{cotangent_lift, ensure_regular, MapRef};
use crate::numkernel::linalg::{inverse, jacobian_values};
use crate::numkernel::Scalar;

/// Ratio between the covariant and the coordinate form of `L` for the
/// Euclidean connection, with `Sym` normalized as the average over index
/// permutations.
pub const FLAT_TRIANGLE_FACTOR: i64 = 1;

pub fn flat_triangle_factor<S: Scalar>() -> S {
    S::from_i64(FLAT_TRIANGLE_FACTOR)
}

type Arr3<S> = Vec<Vec<Vec<S>>>;

struct Lifted<S: Scalar> {
    n: usize,
    c: Arr3<S>,
    gamma_tilde: Table21<S>,
}

fn lifted<S: Scalar>(f: &MapRef<S>, gamma: &ConnectionRef<S>, point: &[S]) -> Result<Lifted<S>> {
    let n = f.dim();
    if gamma.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: gamma.dim() });
    }
    if point.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: point.len() });
    }
    ensure_regular(f.as_ref(), &point[..n])?;
    let gt = lift_connection(gamma);
    let c = cocycle_c(&cotangent_lift(f), &gt)?.components(point, 0)?;
    Ok(Lifted { n, c: table_values(&c), gamma_tilde: gt.christoffel(point, 1)? })
}

fn sym3<S: Scalar>(t: &Arr3<S>) -> Arr3<S> {
    let d = t.len();
    let sixth = S::from_ratio(1, 6);
    let mut out = vec![vec![vec![S::zero(); d]; d]; d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let s = t[a][b][c].clone()
                    + t[a][c][b].clone()
                    + t[b][a][c].clone()
                    + t[b][c][a].clone()
                    + t[c][a][b].clone()
                    + t[c][b][a].clone();
                out[a][b][c] = s * sixth.clone();
            }
        }
    }
    out
}

/// `g^{i, pair(i)} = sign(i)`: the only nonzero entry in row `i`.
fn pair<S: Scalar>(n: usize, i: usize) -> (usize, S) {
    if i < n {
        (i + n, S::one())
    } else {
        (i - n, -S::one())
    }
}

/// `∇_i∇_j q` and `∇_i∇_j∇_k q` written as differential operators acting on
/// `q`, with the index order of [`covariant_derivs`](crate::geometry::covariant_derivs).
struct CovariantExpansion<S: Scalar> {
    d: usize,
    /// `Γ^e_{ba}` at the point.
    g: Arr3<S>,
    /// `∂_c Γ^e_{ba}` at the point, indexed `[c][e][b][a]`.
    dg: Vec<Arr3<S>>,
}

impl<S: Scalar> CovariantExpansion<S> {
    fn new(gamma: &Table21<S>) -> Result<Self> {
        let d = gamma.len();
        let g = table_values(gamma);
        let dg = (0..d)
            .map(|c| {
                let mut unit = vec![0u8; d];
                unit[c] = 1;
                gamma
                    .iter()
                    .map(|ge| ge.iter().map(|gb| gb.iter().map(|j| j.derivative(&unit)).collect()).collect())
                    .collect::<Result<Arr3<S>>>()
            })
            .collect::<Result<_>>()?;
        Ok(CovariantExpansion { d, g, dg })
    }

    /// `op += w ∇_b∇_a`, i.e. `w (∂_a∂_b - Γ^e_{ba} ∂_e)`.
    fn add_second(&self, op: &mut LocalDiffOp<S>, b: usize, a: usize, w: &S) -> Result<()> {
        op.add_axes(&[a, b], w.clone())?;
        for e in 0..self.d {
            if !self.g[e][b][a].is_zero() {
                op.add_axes(&[e], -w.clone() * self.g[e][b][a].clone())?;
            }
        }
        Ok(())
    }

    /// `op += w ∇_c∇_b∇_a`, expanding
    /// `∂_c(∇_b∇_a q) - Γ^e_{cb} ∇_e∇_a q - Γ^e_{ca} ∇_b∇_e q`.
    fn add_third(&self, op: &mut LocalDiffOp<S>, c: usize, b: usize, a: usize, w: &S) -> Result<()> {
        op.add_axes(&[a, b, c], w.clone())?;
        for e in 0..self.d {
            if !self.dg[c][e][b][a].is_zero() {
                op.add_axes(&[e], -w.clone() * self.dg[c][e][b][a].clone())?;
            }
            if !self.g[e][b][a].is_zero() {
                op.add_axes(&[e, c], -w.clone() * self.g[e][b][a].clone())?;
            }
            if !self.g[e][c][b].is_zero() {
                self.add_second(op, e, a, &(-w.clone() * self.g[e][c][b].clone()))?;
            }
            if !self.g[e][c][a].is_zero() {
                self.add_second(op, b, e, &(-w.clone() * self.g[e][c][a].clone()))?;
            }
        }
        Ok(())
    }
}

/// `L(f) = Sym(C^j_{ml} g^{im} g^{kl}) ∇_i∇_j∇_k - 3/2 Sym(C^n_{lk} g^{ml} g^{ik}) C^j_{mn} ∇_i∇_j`,
/// expanded into partial derivatives at `point`.
pub fn build_l_covariant<S: Scalar>(f: &MapRef<S>, gamma: &ConnectionRef<S>, point: &[S]) -> Result<LocalDiffOp<S>> {
    let Lifted { n, c, gamma_tilde } = lifted(f, gamma, point)?;
    let d = 2 * n;
    // E^{jik} = C^j_{ml} g^{im} g^{kl}
    let mut e = vec![vec![vec![S::zero(); d]; d]; d];
    for j in 0..d {
        for i in 0..d {
            let (m, si) = pair::<S>(n, i);
            for k in 0..d {
                let (l, sk) = pair::<S>(n, k);
                e[j][i][k] = c[j][m][l].clone() * si.clone() * sk;
            }
        }
    }
    let a = sym3(&e);
    // F^{nmi} = C^n_{lk} g^{ml} g^{ik} has the same contraction pattern as E
    let fs = &a;
    let mut b = vec![vec![S::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = S::zero();
            for m in 0..d {
                for nn in 0..d {
                    acc = acc + fs[nn][m][i].clone() * c[j][m][nn].clone();
                }
            }
            b[i][j] = acc;
        }
    }
    let three_halves = S::from_ratio(3, 2);
    let mut op = LocalDiffOp::zero(point);
    if a.iter().flatten().flatten().all(|v| v.is_zero()) && b.iter().flatten().all(|v| v.is_zero()) {
        return Ok(op);
    }
    let cov = CovariantExpansion::new(&gamma_tilde)?;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                if !a[i][j][k].is_zero() {
                    cov.add_third(&mut op, i, j, k, &a[i][j][k])?;
                }
            }
            if !b[i][j].is_zero() {
                cov.add_second(&mut op, i, j, &(-three_halves.clone() * b[i][j].clone()))?;
            }
        }
    }
    Ok(op)
}

/// Coordinate form: `3 C^i_{jk} ∂_{ξ_j}∂_{ξ_k}∂_{x_i}
/// + 3 (2 C^m_{ik} Γ^k_{jm} + C^m_{ki} C^k_{mj}) ∂_{ξ_i}∂_{ξ_j} + C^{ī}_{jk} ∂_{ξ_i}∂_{ξ_j}∂_{ξ_k}`.
pub fn build_l_coordinate<S: Scalar>(f: &MapRef<S>, gamma: &ConnectionRef<S>, point: &[S]) -> Result<LocalDiffOp<S>> {
    let Lifted { n, c, .. } = lifted(f, gamma, point)?;
    let g = table_values(&gamma.christoffel(&point[..n], 0)?);
    let three = S::from_i64(3);
    let two = S::from_i64(2);
    let mut op = LocalDiffOp::zero(point);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                op.add_axes(&[n + j, n + k, i], three.clone() * c[i][j][k].clone())?;
                op.add_axes(&[n + i, n + j, n + k], c[n + i][j][k].clone())?;
            }
            let mut acc = S::zero();
            for k in 0..n {
                for m in 0..n {
                    acc = acc
                        + two.clone() * c[m][i][k].clone() * g[k][j][m].clone()
                        + c[m][k][i].clone() * c[k][m][j].clone();
                }
            }
            op.add_axes(&[n + i, n + j], three.clone() * acc)?;
        }
    }
    Ok(op)
}

/// Euclidean form, written directly in derivatives of `f`.
pub fn build_l_flat<S: Scalar>(f: &MapRef<S>, point: &[S]) -> Result<LocalDiffOp<S>> {
    let n = f.dim();
    if point.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: point.len() });
    }
    let (x, xi) = point.split_at(n);
    let fj = f.jets(x, 3)?;
    let ji = inverse(&jacobian_values(&fj)).ok_or(Error::SingularJacobian)?;
    let deriv = |l: usize, axes: &[usize]| -> Result<S> {
        let mut e = vec![0u8; n];
        for &a in axes {
            e[a] += 1;
        }
        fj[l].derivative(&e)
    };
    let mut f2 = vec![vec![vec![S::zero(); n]; n]; n];
    let mut f3 = vec![vec![vec![vec![S::zero(); n]; n]; n]; n];
    for l in 0..n {
        for j in 0..n {
            for k in 0..n {
                f2[l][j][k] = deriv(l, &[j, k])?;
                for m in 0..n {
                    f3[l][j][k][m] = deriv(l, &[j, k, m])?;
                }
            }
        }
    }
    let three = S::from_i64(3);
    let mut op = LocalDiffOp::zero(point);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let t1 = (0..n).fold(S::zero(), |acc, l| acc + f2[l][j][k].clone() * ji[i][l].clone());
                op.add_axes(&[n + j, n + k, i], three.clone() * t1)?;

                let mut t3 = S::zero();
                for q in 0..n {
                    let w = (0..n).fold(S::zero(), |acc, m| acc + ji[m][q].clone() * xi[m].clone());
                    if w.is_zero() {
                        continue;
                    }
                    let mut inner = -f3[q][i][j][k].clone();
                    for l in 0..n {
                        for p in 0..n {
                            inner = inner + three.clone() * ji[l][p].clone() * f2[p][i][j].clone() * f2[q][l][k].clone();
                        }
                    }
                    t3 = t3 + w * inner;
                }
                op.add_axes(&[n + i, n + j, n + k], t3)?;
            }
            let mut t2 = S::zero();
            for k in 0..n {
                for q in 0..n {
                    for m in 0..n {
                        for l in 0..n {
                            t2 = t2
                                + f2[k][q][i].clone() * ji[m][k].clone() * f2[l][j][m].clone() * ji[q][l].clone();
                        }
                    }
                }
            }
            op.add_axes(&[n + i, n + j], three.clone() * t2)?;
        }
    }
    Ok(op)
}
