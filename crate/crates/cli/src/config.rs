//! Configuration loading shared by all subcommands.
//!
//! Each subcommand owns a serde-validated config struct with
//! `deny_unknown_fields`, so typos in keys are rejected with the offending
//! key named in the error.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

/// Marker error: anything configuration- or I/O-related exits with code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct CommonArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub jobs: usize,
}

impl CommonArgs {
    /// Load the subcommand config, or fall back to its smoke default.
    pub fn load_config<T: DeserializeOwned + Default>(&self) -> anyhow::Result<T> {
        match &self.config {
            None => Ok(T::default()),
            Some(path) => load_json(path),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os("MINMAX_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Install the rayon pool size requested by --jobs. A zero keeps the
    /// library default; without the `parallel` feature the flag is inert.
    pub fn configure_jobs(&self) {
        #[cfg(feature = "parallel")]
        if self.jobs > 0 {
            // Ignore the error from configuring twice (tests call run() repeatedly).
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(self.jobs)
                .build_global();
        }
    }
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    let value: T = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))?;
    Ok(value)
}

pub fn ensure_out_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| ConfigError(format!("cannot create output dir {}: {e}", dir.display())))?;
    Ok(())
}

