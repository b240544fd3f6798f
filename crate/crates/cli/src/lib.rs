//! Command-line front end for `casimir-core`: run configuration, result
//! tables and reproducibility manifests.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use casimir_core::{CorrugationError, LifshitzError, MaterialError, ModelError, QuadratureError, ReflectionError};
use thiserror::Error;

pub use config::{emit, parse, Command, ConfigError, MaterialSpec, RawConfig, RunConfig};
pub use output::{emit_plot_data, Table};
pub use run::{run, RunReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    InputFile(String),
    #[error("result table is empty; nothing written")]
    EmptyTable,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io { .. } | CliError::InputFile(_) | CliError::EmptyTable => EXIT_IO,
        }
    }
}

impl From<QuadratureError> for CliError {
    fn from(e: QuadratureError) -> Self {
        match e {
            QuadratureError::NonFiniteSample { .. } | QuadratureError::NoDecay(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<MaterialError> for CliError {
    fn from(e: MaterialError) -> Self {
        match e {
            MaterialError::Io { .. } => CliError::InputFile(e.to_string()),
            MaterialError::Quadrature(q) => q.into(),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ReflectionError> for CliError {
    fn from(e: ReflectionError) -> Self {
        match e {
            ReflectionError::Material(m) => m.into(),
            ReflectionError::Lasing(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<LifshitzError> for CliError {
    fn from(e: LifshitzError) -> Self {
        match e {
            LifshitzError::Material(m) => m.into(),
            LifshitzError::Model(m) => m.into(),
            LifshitzError::Quadrature(q) => q.into(),
            LifshitzError::Lasing(_) => CliError::Numerical(e.to_string()),
            LifshitzError::InvalidGrid(_) => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<CorrugationError> for CliError {
    fn from(e: CorrugationError) -> Self {
        match e {
            CorrugationError::Lifshitz(l) => l.into(),
            CorrugationError::Material(m) => m.into(),
            CorrugationError::Model(m) => m.into(),
            CorrugationError::Quadrature(q) => q.into(),
            CorrugationError::Lasing(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}
