//! Library side of the `epswitch` command: configuration, dispatch and
//! deterministic output.

pub mod commands;
pub mod config;
pub mod emit;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::emit::{OutputSet, WrittenFile};

pub use commands::SwitchRecord;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn compute(e: impl std::fmt::Display) -> Self {
        CliError::Compute(e.to_string())
    }

    /// Process exit status: 2 for configuration, 3 for computation and 1
    /// for filesystem failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub rows: usize,
}

impl From<WrittenFile> for ManifestFile {
    fn from(w: WrittenFile) -> Self {
        ManifestFile { name: w.name, rows: w.rows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub command: String,
    pub config: RunConfig,
    pub library_version: String,
    pub wall_time_s: f64,
    pub files: Vec<ManifestFile>,
}

/// Validates the configuration, runs the command and writes its outputs
/// followed by `manifest.json`. On error nothing written by this run is
/// left behind.
pub fn run(config: &RunConfig) -> Result<ResultManifest, CliError> {
    config.validate()?;
    let dir = config.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    let workers = config.workers.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;

    let start = Instant::now();
    let mut out = OutputSet::create(&dir)?;
    pool.install(|| commands::dispatch(config, &mut out))?;
    let mut manifest = ResultManifest {
        command: config.command.as_str().to_string(),
        config: config.clone(),
        library_version: epswitch_core::VERSION.to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        files: out.files().iter().cloned().map(ManifestFile::from).collect(),
    };
    out.write_json(MANIFEST_NAME, &manifest)?;
    let written = out.commit();
    manifest.files = written.into_iter().filter(|w| w.name != MANIFEST_NAME).map(ManifestFile::from).collect();
    Ok(manifest)
}
