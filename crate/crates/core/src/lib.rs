//! Neuroevolved recurrent forecasters for per-asset next-day returns, and a
//! deterministic portfolio backtester that trades on their predictions.
//!
//! * [`market_data`] turns raw daily bars into the seven predictors and
//!   year-based train/valid/test splits.
//! * [`rnn`] holds the graph-encoded recurrent genome, its forward pass and
//!   backpropagation-through-time training.
//! * [`evolution`] grows genomes with an island-model steady-state search.
//! * [`trading`] replays predictions through the long-only and daily
//!   long-short strategies under three transaction-cost models.
//! * [`experiment`] wires the stages together behind a declarative config.

pub mod evolution;
pub mod experiment;
pub mod io;
pub mod market_data;
pub mod rnn;
pub mod trading;

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/market-data.md")]
    mod market_data {}
    #[doc = include_str!("../../../book/src/genomes.md")]
    mod genomes {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/trading.md")]
    mod trading {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
