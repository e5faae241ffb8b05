use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{write_file, ExpError, Result};

/// What one `evolve` or `baseline` command produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// `evolve` or `baseline_<cell>`.
    pub model: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub tickers: Vec<TickerRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickerRun {
    pub ticker: String,
    /// Set when the ticker failed; the selection fields are then empty.
    pub error: Option<String>,
    pub chosen_repeat: Option<usize>,
    /// Relative to the manifest's directory.
    pub chosen_genome: Option<PathBuf>,
    pub chosen_validation_mse: Option<f64>,
    pub repeats: Vec<RepeatRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRun {
    pub index: usize,
    pub seed: u64,
    pub validation_mse: f64,
    pub genome: PathBuf,
}

impl TickerRun {
    pub fn failed(ticker: &str, error: String) -> Self {
        Self {
            ticker: ticker.to_string(),
            error: Some(error),
            chosen_repeat: None,
            chosen_genome: None,
            chosen_validation_mse: None,
            repeats: Vec::new(),
        }
    }

    /// Picks the repeat with the lowest validation MSE; the earliest wins ties.
    pub fn select(ticker: &str, repeats: Vec<RepeatRun>) -> Self {
        let best = repeats
            .iter()
            .min_by(|a, b| a.validation_mse.total_cmp(&b.validation_mse).then(a.index.cmp(&b.index)));
        Self {
            ticker: ticker.to_string(),
            error: None,
            chosen_repeat: best.map(|r| r.index),
            chosen_genome: best.map(|r| r.genome.clone()),
            chosen_validation_mse: best.map(|r| r.validation_mse),
            repeats,
        }
    }
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(&dir.join(Self::FILE_NAME), text.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(Self::FILE_NAME);
        let text = std::fs::read_to_string(&path).map_err(|source| ExpError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ExpError::Manifest {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn succeeded(&self) -> impl Iterator<Item = &TickerRun> {
        self.tickers.iter().filter(|t| t.error.is_none())
    }
}
