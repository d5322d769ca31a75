//! Exact lattice algorithms over rational bases: gauge-generalized AKS
//! sieving, subspace- and convex-body-avoiding solvers, successive minima,
//! parameterized variants and the isolation reduction to unique CVP.
//!
//! Basis vectors are rows throughout.

pub mod cap;
pub mod enumerate;
pub mod error;
pub mod gauge;
pub mod lattice;
pub mod linalg;
pub mod minima;
pub mod par;
pub mod param;
pub mod rational;
pub mod report;
pub mod rng;
pub mod sap;
pub mod sieve;
pub mod unique;

pub use error::{Error, Result};
