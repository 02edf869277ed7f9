//! Scalar fields and truncated multivariate jet arithmetic.

pub mod jet;
pub mod linalg;
pub mod monomials;
pub mod poly;
pub mod scalar;

pub use jet::{jet_invert, jet_sum, Jet};
pub use poly::Poly;
pub use scalar::{parse_scalar, Rational, Scalar};

/// Default truncation order for every jet evaluation.
pub const DEFAULT_ORDER: usize = 4;
