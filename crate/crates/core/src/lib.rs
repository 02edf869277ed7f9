//! Truncated-jet machinery for checking cocycle identities of diffeomorphism
//! groups acting on cotangent bundles.

pub mod cli;
pub mod cocycles;
pub mod error;
pub mod geometry;
pub mod maps;
pub mod numkernel;
pub mod operators;

pub use error::{Error, Result};
