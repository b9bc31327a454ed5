//! B-free states of split linear generators `L = A + B`: the subspace of
//! initial conditions whose evolution under `e^{tL}` ignores `B`.
//!
//! Covers closed Schrödinger evolution (interaction-free states), the von
//! Neumann equation, and GKSL semigroups (decoherence-free states), together
//! with the catalog of reference models and verification by propagation.

pub mod error;
pub mod bfree;
pub mod liouville;
pub mod modelfile;
pub mod models;
pub mod numkernel;
pub mod operators;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod test_util;
