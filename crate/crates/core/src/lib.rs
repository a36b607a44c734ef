//! Exact computations in the kappa ring of the moduli spaces of stable curves.
//!
//! Classes are expanded in κ-monomials, paired against boundary strata through
//! their weight multisets, and ranked with exact rational linear algebra.

pub mod error;
pub mod exactalg;
pub mod intersect;
pub mod kapparing;
pub mod partitions;
pub mod pushforward;
pub mod relations;
pub mod strata;
pub mod verify;

pub use error::{Error, Result};
pub use exactalg::{LabeledMatrix, LabeledVector, Rational};
pub use kapparing::RankReport;
pub use partitions::{Composition, Partition};
pub use pushforward::{Basis, FormalExpr, KappaPoly};
pub use strata::{KTrivialCycle, StableWeightedGraph, ThetaMultiset};
