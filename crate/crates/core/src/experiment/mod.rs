//! Config-driven pipeline: per-ticker evolution or baseline training with
//! repeated runs, prediction panels, backtests and summary reports.
//!
//! Outputs live under the configured output directory:
//!
//! ```text
//! out/
//!   summary.csv
//!   <model>/                   evolve, baseline_lstm, baseline_gru, ...
//!     manifest.json
//!     predictions.csv
//!     <TICKER>/repeat_<r>.genome.json
//!     <TICKER>/repeat_<r>.log.csv    (evolve only)
//!     backtest/<strategy>_<cost>.txt
//!     backtest/buy_and_hold_<cost>.txt
//!     backtest/grid_<cost>.csv
//! ```
//!
//! Every file is written atomically, and a rerun with the same inputs
//! rewrites identical bytes.

mod commands;
mod config;
mod data;
mod manifest;

pub use commands::{
    cmd_backtest, cmd_baseline, cmd_evolve, cmd_predict, cmd_report, cmd_synth, BacktestOutcome,
    PredictOutcome, SynthOptions,
};
pub use config::{
    derive_seed, BaselineSettings, DataConfig, EvolutionSettings, ExperimentConfig, OutputConfig,
    StrategyKind, StrategySettings,
};
pub use data::{load_dataset, load_price_book, resolve_tickers};
pub use manifest::{RepeatRun, RunManifest, TickerRun};

use crate::evolution::EvoError;
use crate::market_data::DataError;
use crate::rnn::RnnError;
use crate::trading::TradeError;

#[derive(Debug, thiserror::Error)]
pub enum ExpError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path}: {reason}")]
    Manifest { path: String, reason: String },
    #[error("{ticker}: genome file {path} is missing")]
    MissingGenome { ticker: String, path: String },
    #[error("no ticker produced a model")]
    NothingToPredict,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Rnn(#[from] RnnError),
    #[error(transparent)]
    Evo(#[from] EvoError),
    #[error(transparent)]
    Trade(#[from] TradeError),
}

pub type Result<T, E = ExpError> = std::result::Result<T, E>;

pub(crate) fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    crate::io::write_atomic(path, bytes).map_err(|source| ExpError::Io {
        path: path.display().to_string(),
        source,
    })
}
