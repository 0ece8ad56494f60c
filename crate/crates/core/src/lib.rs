//! Magnon squeezing in a cavity–magnon–qubit system driven by two qubit tones.
//!
//! Layers, bottom up: dense operator algebra on tensor-product spaces
//! ([`operators`]), Hamiltonian construction and derived parameters
//! ([`model`]), unitary and Lindblad time evolution ([`dynamics`]), squeezing
//! diagnostics ([`observables`]) and preset-level scenarios ([`experiments`]).

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod observables;
pub mod operators;

pub use error::{Error, Result};
