use chrono::NaiveDate;
use rayon::prelude::*;

use super::{CostModel, Grid, Ledger, PredictionPanel, PriceBook, Result, ReturnReport, Side, TradeError};

fn check_capital(capital: f64) -> Result<()> {
    if capital > 0.0 && capital.is_finite() {
        Ok(())
    } else {
        Err(TradeError::BadCapital(capital))
    }
}

fn mark_to_market(ledger: &Ledger, book: &PriceBook, day: NaiveDate) -> Result<f64> {
    let mut equity = ledger.cash;
    for (t, &shares) in &ledger.positions {
        equity += shares * book.quote(t, day)?.close;
    }
    Ok(equity)
}

fn liquidate(ledger: &mut Ledger, book: &PriceBook, day: NaiveDate, cost: CostModel) -> Result<()> {
    let held: Vec<String> = ledger.positions.keys().cloned().collect();
    for t in held {
        let sell = book.execution_price(&t, day, Side::Sell, cost)?;
        let buy = book.execution_price(&t, day, Side::Buy, cost)?;
        ledger.close_position(day, &t, sell, buy);
    }
    Ok(())
}

fn finish(
    strategy: String,
    cost: CostModel,
    capital: f64,
    mut ledger: Ledger,
    book: &PriceBook,
    equity: Vec<(NaiveDate, f64)>,
) -> Result<ReturnReport> {
    if let Some(&(last, _)) = equity.last() {
        liquidate(&mut ledger, book, last, cost)?;
    }
    Ok(ReturnReport {
        strategy,
        cost,
        initial_capital: capital,
        final_cash: ledger.cash,
        equity,
        trades: ledger.trades,
    })
}

/// Each day: sell every holding predicted to fall, then split all cash
/// evenly across every ticker predicted to rise, including ones already
/// held. Predictions of exactly zero trigger neither branch. Everything is
/// sold at the last day's prices.
pub fn long_only_backtest(
    panel: &PredictionPanel,
    book: &PriceBook,
    cost: CostModel,
    capital: f64,
) -> Result<ReturnReport> {
    check_capital(capital)?;
    book.check_aligned(panel)?;
    let mut ledger = Ledger::new(capital);
    let mut equity = Vec::with_capacity(panel.days.len());

    for (d, &day) in panel.days.iter().enumerate() {
        let pred = &panel.predicted[d];
        for (k, t) in panel.tickers.iter().enumerate() {
            if pred[k] < 0.0 && ledger.position(t) > 0.0 {
                let price = book.execution_price(t, day, Side::Sell, cost)?;
                ledger.close_position(day, t, price, price);
            }
        }
        let invest: Vec<&String> = panel
            .tickers
            .iter()
            .zip(pred)
            .filter(|(_, &p)| p > 0.0)
            .map(|(t, _)| t)
            .collect();
        if !invest.is_empty() && ledger.cash > 0.0 {
            let quota = ledger.cash / invest.len() as f64;
            for t in invest {
                let price = book.execution_price(t, day, Side::Buy, cost)?;
                ledger.trade(day, t, Side::Buy, quota / price, price);
            }
            // the whole balance is deployed; drop the rounding residue
            ledger.cash = 0.0;
        }
        equity.push((day, mark_to_market(&ledger, book, day)?));
    }
    finish("long_only".into(), cost, capital, ledger, book, equity)
}

/// Ticker indices ordered by prediction, best first; ties by ticker name.
fn ranking(panel: &PredictionPanel, d: usize) -> Vec<usize> {
    let pred = &panel.predicted[d];
    let mut order: Vec<usize> = (0..panel.tickers.len()).collect();
    order.sort_by(|&a, &b| pred[b].total_cmp(&pred[a]).then_with(|| panel.tickers[a].cmp(&panel.tickers[b])));
    order
}

/// Daily rebalanced long-short book.
///
/// A day trades only if the `n_long`-th highest prediction is positive and
/// the `n_short`-th lowest is negative. On such a day every position is
/// closed, then the post-liquidation cash `C` buys `C / n_long` of each top
/// ticker and sells short `C / n_short` of each bottom ticker. Nothing
/// changes on other days. Everything is closed at the last day's prices.
pub fn long_short_backtest(
    panel: &PredictionPanel,
    book: &PriceBook,
    cost: CostModel,
    capital: f64,
    n_long: usize,
    n_short: usize,
) -> Result<ReturnReport> {
    check_capital(capital)?;
    let tickers = panel.tickers.len();
    if n_long == 0 || n_short == 0 || n_long + n_short > tickers {
        return Err(TradeError::BadLegs {
            n_long,
            n_short,
            tickers,
        });
    }
    book.check_aligned(panel)?;
    let mut ledger = Ledger::new(capital);
    let mut equity = Vec::with_capacity(panel.days.len());

    for (d, &day) in panel.days.iter().enumerate() {
        let order = ranking(panel, d);
        let pred = &panel.predicted[d];
        let longs = &order[..n_long];
        let shorts = &order[tickers - n_short..];
        if pred[longs[n_long - 1]] > 0.0 && pred[shorts[0]] < 0.0 {
            liquidate(&mut ledger, book, day, cost)?;
            let cash = ledger.cash;
            if cash > 0.0 {
                let quota_long = cash / n_long as f64;
                let quota_short = cash / n_short as f64;
                for &k in longs {
                    let t = &panel.tickers[k];
                    let price = book.execution_price(t, day, Side::Buy, cost)?;
                    ledger.trade(day, t, Side::Buy, quota_long / price, price);
                }
                for &k in shorts {
                    let t = &panel.tickers[k];
                    let price = book.execution_price(t, day, Side::Sell, cost)?;
                    ledger.trade(day, t, Side::Sell, quota_short / price, price);
                }
            }
        }
        equity.push((day, mark_to_market(&ledger, book, day)?));
    }
    finish(format!("long_short_{n_long}_{n_short}"), cost, capital, ledger, book, equity)
}

/// Equal currency amounts of every ticker bought on the first day and sold
/// on the last.
pub fn buy_and_hold(
    book: &PriceBook,
    tickers: &[String],
    days: &[NaiveDate],
    cost: CostModel,
    capital: f64,
) -> Result<ReturnReport> {
    check_capital(capital)?;
    if tickers.is_empty() {
        return Err(TradeError::Panel("buy and hold needs at least one ticker".into()));
    }
    let mut ledger = Ledger::new(capital);
    let mut equity = Vec::with_capacity(days.len());
    if let Some(&first) = days.first() {
        let quota = capital / tickers.len() as f64;
        for t in tickers {
            let price = book.execution_price(t, first, Side::Buy, cost)?;
            ledger.trade(first, t, Side::Buy, quota / price, price);
        }
        ledger.cash = 0.0;
    }
    for &day in days {
        equity.push((day, mark_to_market(&ledger, book, day)?));
    }
    finish("buy_and_hold".into(), cost, capital, ledger, book, equity)
}

/// [`long_short_backtest`] for every `n_long` in `1..=max_long` and
/// `n_short` in `1..=max_short`. Cells run in parallel.
pub fn sweep_grid(
    panel: &PredictionPanel,
    book: &PriceBook,
    cost: CostModel,
    capital: f64,
    max_long: usize,
    max_short: usize,
) -> Result<Grid> {
    let cells: Vec<(usize, usize)> = (1..=max_long)
        .flat_map(|l| (1..=max_short).map(move |s| (l, s)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(l, s)| {
            long_short_backtest(panel, book, cost, capital, l, s)
                .map(|r| r.overall_return())
                .map_err(|e| TradeError::Cell {
                    n_long: l,
                    n_short: s,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Grid {
        cost,
        returns: values.chunks(max_short.max(1)).map(<[f64]>::to_vec).collect(),
    })
}
