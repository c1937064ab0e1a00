//! Homogeneous geodesic vectors of invariant Randers metrics on Lie groups.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod criterion;
pub mod error;
pub mod lie;
pub mod minkowski;

pub use criterion::{GeodesicProblem, ResidualVector, TangencyCertificate};
pub use error::{Error, Result};
pub use lie::{KillingData, LieAlgebra, ReductiveDecomposition, Signature};
pub use minkowski::{IndicatrixPoint, RandersStructure};
pub mod report;
pub mod solvers;
