use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ExpError, Result};
use crate::evolution::EvoConfig;
use crate::rnn::{CellKind, TrainConfig};
use crate::trading::CostModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every run seed is derived from it.
    #[serde(default)]
    pub seed: u64,
    pub data: DataConfig,
    #[serde(default)]
    pub evolution: EvolutionSettings,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub baseline: BaselineSettings,
    #[serde(default)]
    pub strategy: StrategySettings,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub dir: PathBuf,
    /// Empty means every `*.csv` in `dir` except the index file.
    #[serde(default)]
    pub tickers: Vec<String>,
    #[serde(default = "default_index_file")]
    pub index_file: String,
    pub test_year: i32,
}

fn default_index_file() -> String {
    "index.csv".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionSettings {
    /// Independent runs per ticker; the best on validation is kept.
    pub repeats: usize,
    /// Its `seed` is ignored: each run gets a derived seed.
    #[serde(flatten)]
    pub config: EvoConfig,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        Self {
            repeats: 10,
            config: EvoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSettings {
    pub cells: Vec<CellKind>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub repeats: usize,
    pub layers: usize,
    /// Cells per layer; 0 means one per input.
    pub layer_width: usize,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        Self {
            cells: vec![CellKind::Lstm, CellKind::Gru, CellKind::Mgu],
            epochs: 1000,
            learning_rate: 0.0001,
            repeats: 10,
            layers: 2,
            layer_width: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    LongOnly,
    LongShort,
    /// Every long-short leg count up to `max_long` by `max_short`.
    Sweep,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::LongOnly => "long_only",
            StrategyKind::LongShort => "long_short",
            StrategyKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySettings {
    pub kind: StrategyKind,
    pub cost: CostModel,
    pub capital: f64,
    pub n_long: usize,
    pub n_short: usize,
    pub max_long: usize,
    pub max_short: usize,
}

impl Default for StrategySettings {
    fn default() -> Self {
        Self {
            kind: StrategyKind::LongOnly,
            cost: CostModel::BidAsk,
            capital: 1_000_000.0,
            n_long: 5,
            n_short: 5,
            max_long: 15,
            max_short: 15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExpError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative data and output directories are taken
    /// relative to the file's own directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ExpError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.data.dir.is_relative() {
            cfg.data.dir = base.join(&cfg.data.dir);
        }
        if cfg.output.dir.is_relative() {
            cfg.output.dir = base.join(&cfg.output.dir);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(ExpError::Config(m));
        if self.evolution.repeats == 0 || self.baseline.repeats == 0 {
            return err("repeats must be at least 1".into());
        }
        self.evolution.config.validate()?;
        self.training.validate()?;
        if let Some(c) = self.baseline.cells.iter().find(|c| !c.is_memory_cell()) {
            return err(format!("baseline cell `{c}` is not a memory cell"));
        }
        if self.baseline.layers == 0 || !(self.baseline.learning_rate > 0.0) {
            return err("baseline needs at least one layer and a positive learning rate".into());
        }
        let s = &self.strategy;
        if !(s.capital > 0.0 && s.capital.is_finite()) {
            return err(format!("capital must be positive, got {}", s.capital));
        }
        if s.n_long == 0 || s.n_short == 0 || s.max_long == 0 || s.max_short == 0 {
            return err("long and short leg counts must be at least 1".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML form, in hex. The output directory is
    /// left out so a run can be repeated elsewhere under the same hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir = PathBuf::new();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }
}

/// Seed for one run: the first eight bytes of
/// `SHA-256(master_seed || tag || ticker || repeat)`, little endian.
pub fn derive_seed(master: u64, tag: &str, ticker: &str, repeat: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for part in [tag, ticker] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update((repeat as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[data]\ndir = \"data\"\ntest_year = 2022\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.evolution.repeats, 10);
        assert_eq!(cfg.evolution.config.n_islands, 10);
        assert_eq!(cfg.baseline.epochs, 1000);
        assert_eq!(cfg.baseline.learning_rate, 0.0001);
        assert_eq!(cfg.strategy.cost, CostModel::BidAsk);
        assert_eq!(cfg.data.index_file, "index.csv");
    }

    #[test]
    fn round_trips_through_toml() {
        let text = format!("seed = 9\n{MINIMAL}[evolution]\nrepeats = 2\nbudget = 30\n[strategy]\nkind = \"long_short\"\ncost = \"half_spread\"\n");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.evolution.config.budget, 30);
        assert_eq!(cfg.strategy.kind, StrategyKind::LongShort);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.hash().len(), 64);
        let mut moved = cfg.clone();
        moved.output.dir = "elsewhere".into();
        assert_eq!(moved.hash(), cfg.hash());
        moved.seed += 1;
        assert_ne!(moved.hash(), cfg.hash());
    }

    #[test]
    fn bad_values_rejected() {
        for extra in [
            "[evolution]\nrepeats = 0\n",
            "[baseline]\ncells = [\"simple\"]\n",
            "[strategy]\ncapital = -1.0\n",
            "[strategy]\ncost = \"free\"\n",
            "bogus = 1\n",
        ] {
            let text = if extra.starts_with('[') { format!("{MINIMAL}{extra}") } else { format!("{extra}{MINIMAL}") };
            assert!(ExperimentConfig::from_toml(&text).is_err(), "{extra}");
        }
    }

    #[test]
    fn documented_schema_matches_defaults() {
        let guide = include_str!("../../../../book/src/experiments.md");
        let block = guide
            .split("```toml\n")
            .nth(1)
            .and_then(|rest| rest.split("```").next())
            .expect("guide has a toml block");
        let documented = ExperimentConfig::from_toml(block).unwrap();
        let mut defaults = ExperimentConfig::from_toml(MINIMAL).unwrap();
        defaults.seed = documented.seed;
        assert_eq!(documented, defaults);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = derive_seed(1, "evolve", "AAPL", 0);
        assert_eq!(a, derive_seed(1, "evolve", "AAPL", 0));
        assert_ne!(a, derive_seed(1, "evolve", "AAPL", 1));
        assert_ne!(a, derive_seed(2, "evolve", "AAPL", 0));
        assert_ne!(a, derive_seed(1, "evolve", "MSFT", 0));
        assert_ne!(derive_seed(1, "ab", "c", 0), derive_seed(1, "a", "bc", 0));
    }
}
