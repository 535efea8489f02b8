//! Simulation and probabilistic error cancellation for Trotterized
//! Fermi-Hubbard dynamics on small qubit registers.

pub mod characterize;
pub mod circuit;
pub mod decompose;
pub mod experiment;
pub mod hubbard;
pub mod linalg;
pub mod pauli;
pub mod pec;
pub mod postproc;
pub mod ptm;
pub mod seeds;
pub mod sim;
