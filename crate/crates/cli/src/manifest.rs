//! Run manifests and the file-writing helpers shared by all commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mutsel_core::data::Dataset;

use crate::config::{hex, ResolvedConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub name: String,
    pub n_samples: usize,
    pub n_features: usize,
    /// SHA-256 over the shape, the feature values and the labels.
    pub content_hash: String,
}

impl DatasetFingerprint {
    pub fn of(dataset: &Dataset) -> Self {
        let mut h = Sha256::new();
        h.update((dataset.n_samples() as u64).to_le_bytes());
        h.update((dataset.n_features() as u64).to_le_bytes());
        for v in dataset.features().iter() {
            h.update(v.to_le_bytes());
        }
        h.update(dataset.labels());
        Self {
            name: dataset.name().to_string(),
            n_samples: dataset.n_samples(),
            n_features: dataset.n_features(),
            content_hash: hex(&h.finalize()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: PathBuf,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub cell: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub toolkit_version: String,
    pub config_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub workers: usize,
    pub config: ResolvedConfig,
    pub datasets: Vec<DatasetFingerprint>,
    pub outputs: Vec<OutputFile>,
    pub failed_cells: Vec<FailedCell>,
    pub n_cells: usize,
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn is_partial(&self) -> bool {
        !self.failed_cells.is_empty()
    }

    pub fn result_files(&self) -> impl Iterator<Item = &OutputFile> {
        self.outputs.iter().filter(|o| o.kind == "result")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes a CSV with `header` and string rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::output(path, e))?;
    w.write_record(header).map_err(|e| CliError::output(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// File-system friendly rendering of a cell or dataset name.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}
