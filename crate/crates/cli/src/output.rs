//! Everything a run writes goes into one output directory.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(self.path(name), text).with_context(|| format!("writing {name}"))
    }

    /// CSV with a header row. An empty `rows` gives a header-only file.
    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name)).with_context(|| format!("writing {name}"))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run bookkeeping that changes from run to run. Kept out of the result
/// files so those depend only on config and seed.
#[derive(Serialize)]
pub struct Metadata {
    pub command: String,
    pub config: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix: f64,
    pub runtime_secs: f64,
    pub exit_code: i32,
    pub version: &'static str,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn fmt(v: f64) -> String {
    format!("{v:e}")
}
