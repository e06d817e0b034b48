//! Noise-invariant combinations of expectation values for quNit channels.
//!
//! The crate is organized bottom-up:
//!
//! * [`operators`]: dense complex matrices, states, the generalized Pauli
//!   and Hermitian operator bases;
//! * [`channels`]: the catalog of Kraus channels and CPTP validation;
//! * [`invariants`]: the Heisenberg-picture superoperator, its eigenoperators,
//!   discovery of the three invariant families and their certification;
//! * [`measurement`]: finite-shot Born-rule estimation;
//! * [`protocols`]: key distribution with decoys, remote transfer through a
//!   depolarizing channel, and the six-level ancilla-free code.

pub mod channels;
pub mod error;
pub mod invariants;
pub mod linalg;
pub mod measurement;
pub mod operators;
pub mod protocols;
pub mod rng;

pub use error::{Error, Result};
pub use operators::{ComplexMatrix, DensityMatrix, ExpectationValue, C64};
pub use rng::RngSeed;
