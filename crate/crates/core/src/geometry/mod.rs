//! Connections, their lift to `T*M`, pullbacks, and the tensor `C(F)`.
//!
//! Index tables are stored `[k][i][j]` for `T^k_ij`. On `T*M` the base
//! indices are `0..n` and the fiber (barred) indices `n..2n`.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::numkernel::linalg::Matrix;
use crate::numkernel::{Jet, Scalar};

mod connection;
mod covariant;
mod tensor;

pub use connection::{
    lift_connection, pullback_connection, FlatConnection, LiftedConnection, PolyConnection, PulledBack,
};
pub use covariant::{covariant_derivs, CovariantDerivs};
pub use tensor::{cocycle_c, tensor_pullback, CocycleC, TensorPullback};

/// Jets of a `(2,1)` table, indexed `[k][i][j]`.
pub type Table21<S> = Vec<Vec<Vec<Jet<S>>>>;

pub trait Connection<S: Scalar>: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Jets of `Γ^k_ij` at `point`.
    fn christoffel(&self, point: &[S], order: usize) -> Result<Table21<S>>;
}

pub type ConnectionRef<S> = Arc<dyn Connection<S>>;

pub trait TensorField21<S: Scalar>: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Jets of `T^k_ij` at `point`.
    fn components(&self, point: &[S], order: usize) -> Result<Table21<S>>;
}

pub type TensorRef<S> = Arc<dyn TensorField21<S>>;

/// `g^{IJ}` with `g^{i, n+i} = 1 = -g^{n+i, i}`.
pub fn symplectic_bivector<S: Scalar>(n: usize) -> Matrix<S> {
    let mut g = vec![vec![S::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        g[i][n + i] = S::one();
        g[n + i][i] = -S::one();
    }
    g
}

pub fn zero_table<S: Scalar>(dim: usize, jet_dim: usize, order: usize) -> Table21<S> {
    vec![vec![vec![Jet::zero(jet_dim, order); dim]; dim]; dim]
}

pub fn table_values<S: Scalar>(t: &Table21<S>) -> Vec<Vec<Vec<S>>> {
    t.iter().map(|a| a.iter().map(|b| b.iter().map(Jet::value).collect()).collect()).collect()
}

pub fn table_sub<S: Scalar>(a: &Table21<S>, b: &Table21<S>) -> Table21<S> {
    zip_table(a, b, |x, y| x - y)
}

pub fn table_add<S: Scalar>(a: &Table21<S>, b: &Table21<S>) -> Table21<S> {
    zip_table(a, b, |x, y| x + y)
}

fn zip_table<S: Scalar>(a: &Table21<S>, b: &Table21<S>, op: impl Fn(&Jet<S>, &Jet<S>) -> Jet<S>) -> Table21<S> {
    a.iter()
        .zip(b)
        .map(|(ak, bk)| ak.iter().zip(bk).map(|(ai, bi)| ai.iter().zip(bi).map(|(x, y)| op(x, y)).collect()).collect())
        .collect()
}

/// Whether `T^k_ij == T^k_ji` for every component (exact comparison on
/// exact backends, `tol` otherwise).
pub fn is_symmetric<S: Scalar>(t: &Table21<S>, tol: f64) -> bool {
    t.iter().all(|tk| {
        (0..tk.len()).all(|i| (0..i).all(|j| tk[i][j].approx_eq(&tk[j][i], tol)))
    })
}

/// Largest coefficient of any component; 0 for the zero table.
pub fn table_max_abs<S: Scalar>(t: &Table21<S>) -> f64 {
    t.iter().flatten().flatten().flat_map(|j| j.coeffs().iter().map(|c| c.magnitude())).fold(0.0, f64::max)
}

pub fn table_is_zero<S: Scalar>(t: &Table21<S>) -> bool {
    t.iter().flatten().flatten().all(Jet::is_zero)
}
