//! Prolongations of vector fields on jet spaces, standard and twisted
//! (λ, μ and σ), together with the symmetry, reduction, gauge and
//! variational tooling built on them.
//!
//! Symbolic identities are certified by a seed-deterministic numeric oracle
//! ([`oracle::Oracle`]) instead of full canonical simplification.

pub mod corpus;
pub mod dynsys;
pub mod error;
pub mod expr;
pub mod field;
pub mod gauge;
pub mod invariants;
pub mod jet;
pub mod linalg;
pub mod matrix;
pub mod oracle;
pub mod prolong;
pub mod selftest;
pub mod symmetry;
pub mod variational;

pub use error::{Error, Result};
pub use expr::{Expr, Symbol};
pub use field::{ProlongedField, VectorField};
pub use jet::{JetSpace, MultiIndex};
pub use matrix::Matrix;
pub use oracle::Oracle;
pub use prolong::TwistData;
