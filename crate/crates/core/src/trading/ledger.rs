use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::Side;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub day: NaiveDate,
    pub ticker: String,
    pub side: Side,
    /// Always positive; `side` gives the direction.
    pub shares: f64,
    pub price: f64,
}

impl Trade {
    /// Signed change in cash.
    pub fn cash_flow(&self) -> f64 {
        match self.side {
            Side::Buy => -self.shares * self.price,
            Side::Sell => self.shares * self.price,
        }
    }
}

/// Cash, signed positions and the trades that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    pub initial_cash: f64,
    pub cash: f64,
    /// Positive for long, negative for short. Flat tickers are removed.
    pub positions: BTreeMap<String, f64>,
    pub trades: Vec<Trade>,
}

impl Ledger {
    pub fn new(cash: f64) -> Self {
        Self {
            initial_cash: cash,
            cash,
            positions: BTreeMap::new(),
            trades: Vec::new(),
        }
    }

    pub fn position(&self, ticker: &str) -> f64 {
        self.positions.get(ticker).copied().unwrap_or(0.0)
    }

    pub fn trade(&mut self, day: NaiveDate, ticker: &str, side: Side, shares: f64, price: f64) {
        let t = Trade {
            day,
            ticker: ticker.to_string(),
            side,
            shares,
            price,
        };
        self.cash += t.cash_flow();
        apply(&mut self.positions, &t);
        self.trades.push(t);
    }

    /// Closes the position in `ticker` at `price`, whichever way it points.
    pub fn close_position(&mut self, day: NaiveDate, ticker: &str, sell_price: f64, buy_price: f64) {
        let held = self.position(ticker);
        if held > 0.0 {
            self.trade(day, ticker, Side::Sell, held, sell_price);
        } else if held < 0.0 {
            self.trade(day, ticker, Side::Buy, -held, buy_price);
        }
        self.positions.remove(ticker);
    }

    /// Rebuilds cash and positions from the trade log alone.
    pub fn replay(initial_cash: f64, trades: &[Trade]) -> (f64, BTreeMap<String, f64>) {
        let mut cash = initial_cash;
        let mut positions = BTreeMap::new();
        for t in trades {
            cash += t.cash_flow();
            apply(&mut positions, t);
        }
        positions.retain(|_, v: &mut f64| v.abs() > 1e-9);
        (cash, positions)
    }
}

fn apply(positions: &mut BTreeMap<String, f64>, t: &Trade) {
    let delta = match t.side {
        Side::Buy => t.shares,
        Side::Sell => -t.shares,
    };
    *positions.entry(t.ticker.clone()).or_insert(0.0) += delta;
}
