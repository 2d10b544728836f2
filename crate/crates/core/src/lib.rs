//! Jordan–Schwinger su(2) on truncated bosonic Fock spaces, with generalized
//! ladder operators for the Casimir `J²` built from exact-rational
//! polynomial recurrences and certified by numerical residual checks.

pub mod error;
pub mod casimir;
pub mod fock;
pub mod io;
pub mod ladder;
pub mod operator;
pub mod schwinger;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{dimension, enumerate_sector, FockState, SectorBasis};
pub use operator::{commutator, commutator_residual, residual, residual_restricted, Restriction, ResidualReport, SparseOperator, C64};
