//! Small dense linear algebra over a [`Scalar`] field and over jets.

use super::jet::Jet;
use super::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

fn pick_pivot<S: Scalar>(rows: impl Iterator<Item = (usize, f64, bool)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (r, mag, nonzero) in rows {
        if !nonzero {
            continue;
        }
        // exact backends take the first nonzero entry, floats the largest
        if S::EXACT {
            return Some(r);
        }
        if best.is_none_or(|(_, m)| mag > m) {
            best = Some((r, mag));
        }
    }
    best.map(|(r, _)| r)
}

/// Gauss–Jordan inverse; `None` when singular.
pub fn inverse<S: Scalar>(m: &Matrix<S>) -> Option<Matrix<S>> {
    let n = m.len();
    let mut a: Matrix<S> = m.clone();
    let mut inv: Matrix<S> = identity(n);
    for col in 0..n {
        let piv = pick_pivot::<S>(
            (col..n).map(|r| (r, a[r][col].magnitude(), !a[r][col].is_zero())),
        )?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].recip()?;
        for c in 0..n {
            a[col][c] = a[col][c].clone() * p.clone();
            inv[col][c] = inv[col][c].clone() * p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                a[r][c] = a[r][c].clone() - factor.clone() * a[col][c].clone();
                inv[r][c] = inv[r][c].clone() - factor.clone() * inv[col][c].clone();
            }
        }
    }
    Some(inv)
}

pub fn determinant<S: Scalar>(m: &Matrix<S>) -> S {
    let n = m.len();
    let mut a = m.clone();
    let mut det = S::one();
    for col in 0..n {
        let Some(piv) = pick_pivot::<S>(
            (col..n).map(|r| (r, a[r][col].magnitude(), !a[r][col].is_zero())),
        ) else {
            return S::zero();
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        let p_inv = p.recip().expect("nonzero pivot");
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() * p_inv.clone();
            for c in col..n {
                a[r][c] = a[r][c].clone() - factor.clone() * a[col][c].clone();
            }
        }
    }
    det
}

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect()
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(S::zero(), |acc, t| acc + a[i][t].clone() * b[t][j].clone()))
                .collect()
        })
        .collect()
}

pub fn transpose<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_vec<S: Scalar>(a: &Matrix<S>, v: &[S]) -> Vec<S> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone()))
        .collect()
}

/// Inverse of a square matrix of jets; pivots must have a nonzero value.
pub fn jet_matrix_inverse<S: Scalar>(m: &[Vec<Jet<S>>]) -> Option<Vec<Vec<Jet<S>>>> {
    let n = m.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let dim = m[0][0].dim();
    let order = m.iter().flatten().map(|j| j.order()).min().unwrap_or(0);
    let mut a: Vec<Vec<Jet<S>>> =
        m.iter().map(|r| r.iter().map(|j| j.truncate(order)).collect()).collect();
    let mut inv: Vec<Vec<Jet<S>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(dim, order, if i == j { S::one() } else { S::zero() }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = pick_pivot::<S>(
            (col..n).map(|r| {
                let v = a[r][col].value();
                (r, v.magnitude(), !v.is_zero())
            }),
        )?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].recip().ok()?;
        for c in 0..n {
            a[col][c] = &a[col][c] * &p;
            inv[col][c] = &inv[col][c] * &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                a[r][c] = &a[r][c] - &(&factor * &a[col][c]);
                inv[r][c] = &inv[r][c] - &(&factor * &inv[col][c]);
            }
        }
    }
    Some(inv)
}

/// Jacobian jets `∂F^a/∂x_i` (row `a`, column `i`); order drops by one.
pub fn jacobian_jets<S: Scalar>(map: &[Jet<S>]) -> crate::error::Result<Vec<Vec<Jet<S>>>> {
    map.iter().map(|f| f.gradient()).collect()
}

/// Jacobian at the base point from first-order coefficients.
pub fn jacobian_values<S: Scalar>(map: &[Jet<S>]) -> Matrix<S> {
    map.iter()
        .map(|f| (0..f.dim()).map(|a| f.coeff(&unit(f.dim(), a))).collect())
        .collect()
}

pub fn unit(dim: usize, axis: usize) -> Vec<u8> {
    let mut e = vec![0u8; dim];
    e[axis] = 1;
    e
}
