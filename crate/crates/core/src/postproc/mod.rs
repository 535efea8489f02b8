//! Turning mitigated pseudo-populations into physical, comparable numbers.

pub mod bootstrap;
pub mod fidelity;
pub mod mle;
pub mod observables;
pub mod symmetry;

use thiserror::Error;

pub use bootstrap::{bootstrap, bootstrap_many, BootstrapResult};
pub use fidelity::{fit_fidelity_per_gate, population_fidelity, population_fidelity_with, FidelityFit, FidelityMode};
pub use mle::mle_project;
pub use observables::spin_charge;
pub use symmetry::{post_select, SymmetrySector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PostError {
    #[error("all probability mass lies outside the symmetry sector (in-sector mass {in_sector:.3e})")]
    EmptySector { in_sector: f64 },
    #[error("symmetry sector has no allowed states")]
    NoAllowedStates,
    #[error("fit is degenerate: {0}")]
    FitDegenerate(String),
    #[error("layout mismatch: {0}")]
    BadLayout(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
