//! Deterministic portfolio backtesting on per-ticker return predictions.
//!
//! Two strategies are simulated with fractional shares:
//!
//! * [`long_only_backtest`]: each day, sell holdings predicted to fall and
//!   split all cash evenly across tickers predicted to rise.
//! * [`long_short_backtest`]: each day the predictions are ranked; when the
//!   `n_long`-th best is positive and the `n_short`-th worst is negative,
//!   the book is flattened and rebuilt with equal-sized long and short legs.
//!
//! Trades execute at day-`t` prices under a [`CostModel`]. Every backtest
//! returns a [`ReturnReport`] whose return is `(C1 - C0) / C0`.

mod book;
mod ledger;
mod panel;
mod report;
mod strategy;

pub use book::{CostModel, PriceBook, Quote, Side};
pub use ledger::{Ledger, Trade};
pub use panel::{PanelRecord, PredictionPanel, PANEL_CSV_HEADER};
pub use report::{Grid, ReturnReport};
pub use strategy::{buy_and_hold, long_only_backtest, long_short_backtest, sweep_grid};

use chrono::NaiveDate;

#[derive(Debug, thiserror::Error)]
pub enum TradeError {
    #[error("no quote for {ticker} on {day}")]
    MissingQuote { ticker: String, day: NaiveDate },
    #[error("prices missing for {} (ticker, day) pairs, first: {}", .0.len(), .0.first().map(|(t, d)| format!("{t} {d}")).unwrap_or_default())]
    Misaligned(Vec<(String, NaiveDate)>),
    #[error("capital must be positive and finite, got {0}")]
    BadCapital(f64),
    #[error("need 1 <= n_long, 1 <= n_short and n_long + n_short <= {tickers}, got {n_long} + {n_short}")]
    BadLegs {
        n_long: usize,
        n_short: usize,
        tickers: usize,
    },
    #[error("grid cell (long_{n_long}, short_{n_short}): {source}")]
    Cell {
        n_long: usize,
        n_short: usize,
        #[source]
        source: Box<TradeError>,
    },
    #[error("prediction panel: {0}")]
    Panel(String),
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = TradeError> = std::result::Result<T, E>;
