//! Simulation and variational encoding of attractive Bose-Hubbard ground
//! states on number-preserving continuous-variable photonic circuits.

pub mod ansatz;
pub mod config;
pub mod engine;
pub mod error;
pub mod fock;
pub mod gates;
pub mod measure;
pub mod model;
pub mod optimize;
pub mod rng;
pub mod state;

pub use error::{Error, Result};
pub use fock::{dimension, Configuration, FockBasis};
pub use gates::{Gate, Simulator};
pub use model::{build_hamiltonian, ground_state, BHModel, GroundState, SparseHamiltonian, Topology};
pub use state::StateVector;
