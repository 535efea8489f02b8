//! Configured end-to-end experiments: presets, the simulate/mitigate
//! pipeline and the files written for plotting.

pub mod config;
pub mod pipeline;
pub mod report;

use thiserror::Error;

use crate::characterize::CharacterizationError;
use crate::circuit::CircuitError;
use crate::decompose::DecompositionError;
use crate::hubbard::HubbardError;
use crate::pec::PecError;
use crate::postproc::PostError;
use crate::ptm::PtmError;
use crate::sim::SimError;

pub use config::{preset, ChannelSpec, ExperimentConfig, NoiseSpec, PRESET_NAMES};
pub use pipeline::{mitigate, run_experiment, simulate, RawData, ResultBundle, Stage};
pub use report::write_report;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("result bundle is empty")]
    EmptyBundle,
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Hubbard(#[from] HubbardError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Ptm(#[from] PtmError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Characterization(#[from] CharacterizationError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Pec(#[from] PecError),
    #[error(transparent)]
    Post(#[from] PostError),
}

impl ExperimentError {
    /// Prefix a config error with the field it came from.
    pub(crate) fn in_field(self, field: &str) -> Self {
        match self {
            ExperimentError::Config(m) => ExperimentError::Config(format!("{field}: {m}")),
            other => ExperimentError::Config(format!("{field}: {other}")),
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "config",
            ExperimentError::UnknownPreset(_) => "unknown_preset",
            ExperimentError::EmptyBundle => "empty_bundle",
            ExperimentError::Io { .. } => "io",
            ExperimentError::Hubbard(_) => "model",
            ExperimentError::Circuit(_) => "circuit",
            ExperimentError::Ptm(_) => "ptm",
            ExperimentError::Sim(_) => "simulation",
            ExperimentError::Characterization(_) => "characterization",
            ExperimentError::Decomposition(_) => "decomposition",
            ExperimentError::Pec(_) => "pec",
            ExperimentError::Post(_) => "postprocessing",
        }
    }
}
