//! Configuration, file formats and subcommand drivers for `mergo-core`.

use std::path::Path;

use serde_json::json;

pub mod config;
pub mod io;
pub mod run;

pub use config::{Format, RunConfig};
pub use run::{run, Command, Options};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Core(mergo_core::Error),
    #[error("node {node_id} exhausted its retry budget")]
    NodeExhausted { node_id: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// A core error raised while turning the config into model objects.
    pub fn config(e: mergo_core::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn status(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_error",
            CliError::Runtime(_) | CliError::Core(_) => "runtime_error",
            CliError::NodeExhausted { .. } => "node_exhausted",
            CliError::Io { .. } => "io_error",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NodeExhausted { .. } => 4,
            _ => 3,
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> serde_json::Value {
        let mut r = json!({ "status": self.status(), "message": self.to_string() });
        if let CliError::NodeExhausted { node_id } = self {
            r["node_id"] = json!(node_id);
        }
        r
    }
}

impl From<mergo_core::Error> for CliError {
    fn from(e: mergo_core::Error) -> Self {
        match e {
            mergo_core::Error::NodeExhausted { node_id } => CliError::NodeExhausted { node_id },
            other => CliError::Core(other),
        }
    }
}
