use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{PredictionPanel, Result, TradeError};
use crate::market_data::StockBar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    pub close: f64,
    pub bid: f64,
    pub ask: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        })
    }
}

/// How the execution price departs from the close.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// Trade at the close.
    #[default]
    None,
    /// Pay half the quoted spread on top of the close in either direction.
    HalfSpread,
    /// Buy at the ask, sell at the bid.
    BidAsk,
}

impl CostModel {
    pub const ALL: [CostModel; 3] = [CostModel::None, CostModel::HalfSpread, CostModel::BidAsk];

    pub fn name(self) -> &'static str {
        match self {
            CostModel::None => "none",
            CostModel::HalfSpread => "half_spread",
            CostModel::BidAsk => "bid_ask",
        }
    }

    pub fn price(self, q: &Quote, side: Side) -> f64 {
        match (self, side) {
            (CostModel::None, _) => q.close,
            (CostModel::HalfSpread, Side::Buy) => q.close + (q.ask - q.bid) / 2.0,
            (CostModel::HalfSpread, Side::Sell) => q.close - (q.ask - q.bid) / 2.0,
            (CostModel::BidAsk, Side::Buy) => q.ask,
            (CostModel::BidAsk, Side::Sell) => q.bid,
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        CostModel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown cost model `{s}` (expected none, half_spread or bid_ask)"))
    }
}

/// Daily quotes per ticker.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceBook {
    quotes: BTreeMap<String, BTreeMap<NaiveDate, Quote>>,
}

impl PriceBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, ticker: &str, day: NaiveDate, quote: Quote) {
        self.quotes.entry(ticker.to_string()).or_default().insert(day, quote);
    }

    pub fn add_bars(&mut self, ticker: &str, bars: &[StockBar]) {
        for b in bars {
            self.insert(
                ticker,
                b.date,
                Quote {
                    close: b.close,
                    bid: b.bid,
                    ask: b.ask,
                },
            );
        }
    }

    pub fn tickers(&self) -> impl Iterator<Item = &str> {
        self.quotes.keys().map(String::as_str)
    }

    pub fn quote(&self, ticker: &str, day: NaiveDate) -> Result<&Quote> {
        self.quotes
            .get(ticker)
            .and_then(|q| q.get(&day))
            .ok_or_else(|| TradeError::MissingQuote {
                ticker: ticker.to_string(),
                day,
            })
    }

    pub fn execution_price(&self, ticker: &str, day: NaiveDate, side: Side, cost: CostModel) -> Result<f64> {
        Ok(cost.price(self.quote(ticker, day)?, side))
    }

    /// Every `(ticker, day)` of the panel that has no quote.
    pub fn missing(&self, panel: &PredictionPanel) -> Vec<(String, NaiveDate)> {
        let mut out = Vec::new();
        for &day in &panel.days {
            for t in &panel.tickers {
                if self.quote(t, day).is_err() {
                    out.push((t.clone(), day));
                }
            }
        }
        out
    }

    pub(crate) fn check_aligned(&self, panel: &PredictionPanel) -> Result<()> {
        let missing = self.missing(panel);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(TradeError::Misaligned(missing))
        }
    }

    /// The same book with every bid and ask collapsed onto the close.
    pub fn without_spreads(&self) -> PriceBook {
        let mut out = self.clone();
        for q in out.quotes.values_mut().flat_map(|d| d.values_mut()) {
            q.bid = q.close;
            q.ask = q.close;
        }
        out
    }
}
