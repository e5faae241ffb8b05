//! Daily stock and index ingestion, the seven economic predictors, year-based
//! splits and min-max feature scaling.
//!
//! The pipeline for one ticker is
//!
//! ```text
//! load_stock_csv ─┐
//!                 ├─> compute_predictors ─> split_by_year ─> normalize
//! load_index_csv ─┘
//! ```
//!
//! Every stage is a pure function of its inputs, so per-ticker pipelines can
//! run in parallel.

mod dataset;
mod ingest;
mod predictors;
pub mod synthetic;

pub use dataset::{normalize, split_by_year, Normalizer, Series, SplitRange, StockDataset};
pub use ingest::{
    load_index_csv, load_stock_csv, read_index_csv, read_stock_csv, write_index_csv,
    write_stock_csv, INDEX_CSV_HEADER, STOCK_CSV_HEADER,
};
pub use predictors::compute_predictors;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Number of predictors fed to every forecaster.
pub const PREDICTOR_COUNT: usize = 7;

/// Column names of the predictors, in feature-vector order.
pub const PREDICTOR_NAMES: [&str; PREDICTOR_COUNT] = [
    "return",
    "volume_change",
    "bid_ask_spread",
    "illiquidity",
    "turn_over",
    "dji_return",
    "spx_return",
];

/// One trading day of raw market data for a single ticker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StockBar {
    pub date: NaiveDate,
    pub close: f64,
    pub bid: f64,
    pub ask: f64,
    pub volume: f64,
    pub shares_outstanding: f64,
}

/// Daily returns of the two market indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexBar {
    pub date: NaiveDate,
    pub dji_return: f64,
    pub spx_return: f64,
}

/// The seven predictors for one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub date: NaiveDate,
    pub ret: f64,
    pub volume_change: f64,
    pub bid_ask_spread: f64,
    pub illiquidity: f64,
    pub turn_over: f64,
    pub dji_return: f64,
    pub spx_return: f64,
}

impl FeatureRow {
    /// Feature vector in [`PREDICTOR_NAMES`] order.
    pub fn features(&self) -> [f64; PREDICTOR_COUNT] {
        [
            self.ret,
            self.volume_change,
            self.bid_ask_spread,
            self.illiquidity,
            self.turn_over,
            self.dji_return,
            self.spx_return,
        ]
    }

    pub fn with_features(date: NaiveDate, f: [f64; PREDICTOR_COUNT]) -> Self {
        Self {
            date,
            ret: f[0],
            volume_change: f[1],
            bid_ask_spread: f[2],
            illiquidity: f[3],
            turn_over: f[4],
            dji_return: f[5],
            spx_return: f[6],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("line {line}: rejected row: {reason}")]
    Rejected { line: u64, reason: String },
    #[error("line {line}: duplicate date {date}")]
    DuplicateDate { line: u64, date: NaiveDate },
    #[error("need at least {needed} bars, got {got}")]
    TooFewBars { needed: usize, got: usize },
    #[error("index series has no entry for {0}")]
    MissingIndexDate(NaiveDate),
    #[error("{0} split empty")]
    EmptySplit(&'static str),
    #[error("non-finite {field} on {date}")]
    NonFinite { field: &'static str, date: NaiveDate },
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;
