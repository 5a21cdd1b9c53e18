//! Simulation of k-local quantum search and k-local adiabatic search on
//! random satisfiable k-SAT instances.
//!
//! Modules build on each other in order: exact [`combinatorics`] of the k-local
//! objective, random [`instances`] and their exact interpretation sets,
//! diagonal [`hamiltonian`]s, the statevector [`simulator`], the matrix-free
//! [`spectral`] gap solver, the end-to-end [`search`] routines, and the
//! experiment [`harness`].

pub mod combinatorics;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod instances;
pub mod rng;
pub mod search;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
