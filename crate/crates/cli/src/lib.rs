//! Command-line front end for the arrowlab experiments: strict JSON
//! configs, CSV/JSON/SVG artifacts and run manifests.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

pub use commands::{execute, run, Artifact, Outcome};
pub use config::{CommandConfig, CommandKind, Overrides};
pub use error::{CliError, Result};
pub use manifest::RunManifest;
