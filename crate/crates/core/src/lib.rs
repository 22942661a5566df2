//! Core library for simulating quantum error detection on a chain-coupled
//! transmon device, including a walking-ancilla detection cycle, a
//! native-gate transpiler, a coherent-plus-depolarizing noise model, logical
//! qubit tomography, and noise-parameter estimation.

pub mod builders;
pub mod circuit;
pub mod devices;
pub mod equivalence;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod gates;
pub mod linalg;
pub mod noise;
pub mod transpile;
pub mod verify;

pub use error::{Error, Result};
