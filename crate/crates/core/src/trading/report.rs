use std::fmt::Write as _;

use chrono::NaiveDate;

use super::{CostModel, Trade};

/// Outcome of one backtest.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnReport {
    pub strategy: String,
    pub cost: CostModel,
    pub initial_capital: f64,
    pub final_cash: f64,
    /// Cash plus positions marked at the close, after each day's trades and
    /// before the closing liquidation.
    pub equity: Vec<(NaiveDate, f64)>,
    pub trades: Vec<Trade>,
}

impl ReturnReport {
    /// `(C1 - C0) / C0`.
    pub fn overall_return(&self) -> f64 {
        (self.final_cash - self.initial_capital) / self.initial_capital
    }

    pub fn trade_count(&self) -> usize {
        self.trades.len()
    }

    /// `key=value` header lines followed by the equity curve as
    /// `date,equity` rows.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "strategy={}", self.strategy);
        let _ = writeln!(s, "cost={}", self.cost);
        let _ = writeln!(s, "initial_capital={}", self.initial_capital);
        let _ = writeln!(s, "final_cash={}", self.final_cash);
        let _ = writeln!(s, "return={}", self.overall_return());
        let _ = writeln!(s, "trade_count={}", self.trade_count());
        s.push_str("date,equity\n");
        for (d, e) in &self.equity {
            let _ = writeln!(s, "{},{}", d.format("%Y-%m-%d"), e);
        }
        s
    }
}

/// Returns of the long-short strategy for every `(n_long, n_short)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub cost: CostModel,
    /// `returns[l - 1][s - 1]` is the return with `l` longs and `s` shorts.
    pub returns: Vec<Vec<f64>>,
}

impl Grid {
    pub fn max_long(&self) -> usize {
        self.returns.len()
    }

    pub fn max_short(&self) -> usize {
        self.returns.first().map_or(0, Vec::len)
    }

    pub fn get(&self, n_long: usize, n_short: usize) -> f64 {
        self.returns[n_long - 1][n_short - 1]
    }

    /// Rows `long_1..`, columns `short_1..`, values as fractional returns.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for k in 1..=self.max_short() {
            let _ = write!(s, ",short_{k}");
        }
        s.push('\n');
        for (l, row) in self.returns.iter().enumerate() {
            let _ = write!(s, "long_{}", l + 1);
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}
