use std::fmt;

use protoscribe_core::backbone::{BackboneError, CohortError};
use protoscribe_core::config::ConfigError;
use protoscribe_core::gate::GateError;
use protoscribe_core::json::JsonlError;
use protoscribe_core::memory::MemoryError;
use protoscribe_core::pipeline::PipelineError;
use protoscribe_core::scribe::ScribeError;
use protoscribe_core::taxonomy::TaxonomyError;

/// Command failure, grouped by exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Backend(_) => 4,
        }
    }

    pub fn data(context: impl fmt::Display, e: impl fmt::Display) -> Self {
        CliError::Data(format!("{context}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Backend(m) => write!(f, "backend failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ScribeError> for CliError {
    fn from(e: ScribeError) -> Self {
        CliError::Backend(e.to_string())
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_error!(
    BackboneError,
    CohortError,
    GateError,
    JsonlError,
    MemoryError,
    PipelineError,
    TaxonomyError,
    std::io::Error
);
