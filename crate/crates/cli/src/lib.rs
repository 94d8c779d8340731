//! Driver layer for `topolab`: configuration, single runs, sweeps, probes and
//! density-field export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

pub mod config;
pub mod export;
pub mod probe;
pub mod run;
pub mod sweep;

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use export::{export_density, DensityGrid};
pub use probe::{run_probe, ProbeOptions};
pub use run::{run_case, CaseOutcome};
pub use sweep::{sweep, SweepAxis, SweepOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] topo_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("sweep: {0}")]
    Sweep(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `bytes`, creating parent directories as needed.
pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, bytes).map_err(io)
}
