//! Z₂ lattice gauge theory on a periodic square lattice: qubit Hamiltonians,
//! Trotter circuits, state-vector simulation and projected variational
//! dynamics.

pub mod circuit;
pub mod config;
pub mod error;
pub mod experiment;
pub mod hamiltonians;
pub mod lattice;
pub mod linalg;
pub mod pauli;
pub mod pvqd;
pub mod simulator;
pub mod verify;
