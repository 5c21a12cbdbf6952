use std::path::PathBuf;

use clap::Parser;

/// Default request body limit for uploads: 256 MiB.
pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 256 * 1024 * 1024;

/// Seed and size of the log written by `--demo`.
pub const DEMO_SEED: u64 = 7;
pub const DEMO_CASES: usize = 500;

#[derive(Debug, Clone, Parser)]
#[command(name = "cpm-server", version, about = "Comparative process mining service")]
pub struct Config {
    /// Directory holding event log files (XES or CSV) and session metadata.
    #[arg(long, env = "CPM_ROOT", default_value = "logs")]
    pub root: PathBuf,

    #[arg(long, env = "CPM_PORT", default_value_t = 8080)]
    pub port: u16,

    /// Largest accepted request body.
    #[arg(long, env = "CPM_MAX_UPLOAD_BYTES", default_value_t = DEFAULT_MAX_UPLOAD_BYTES)]
    pub max_upload_bytes: usize,

    /// Write the seed-7 demo log into the root directory at startup.
    #[arg(long, env = "CPM_DEMO")]
    pub demo: bool,
}

impl Config {
    pub fn with_root(root: impl Into<PathBuf>) -> Self {
        Config {
            root: root.into(),
            port: 8080,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            demo: false,
        }
    }
}
