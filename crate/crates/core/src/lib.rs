//! Selected configuration interaction on sampled determinant subspaces.
//!
//! The crate covers the full sample-based diagonalization workflow:
//! configuration algebra ([`config`]), Hamiltonians and their projected
//! action ([`hamiltonian`]), eigensolvers ([`eigen`]), configuration
//! sampling and recovery ([`sampling`]), the SQD / extended-SQD / QSE
//! pipelines ([`pipelines`]), spin observables ([`observables`]),
//! potential-curve fits ([`fits`]), a dense Fock-space reference
//! implementation ([`fock_oracle`]) and a binary state format ([`persist`]).

pub mod config;
pub mod eigen;
pub mod error;
pub mod fits;
pub mod fock_oracle;
pub mod hamiltonian;
pub mod observables;
pub mod persist;
pub mod pipelines;
pub mod sampling;

pub use error::{Error, Result};
