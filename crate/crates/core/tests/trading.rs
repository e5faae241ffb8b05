mod common;

use common::oracle;
use common::random_market;
use neurotrade::trading::{
    buy_and_hold, long_only_backtest, long_short_backtest, sweep_grid, CostModel, Ledger, PredictionPanel,
    PriceBook, ReturnReport, Side,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn market(seed: u64, tickers: usize, days: usize, spread: f64) -> (PredictionPanel, PriceBook) {
    random_market(&mut ChaCha8Rng::seed_from_u64(seed), tickers, days, spread)
}

fn assert_replays(r: &ReturnReport) {
    let (cash, positions) = Ledger::replay(r.initial_capital, &r.trades);
    assert!(rel(cash, r.final_cash) <= 1e-12 || (cash - r.final_cash).abs() <= 1e-12 * r.initial_capital);
    assert!(positions.is_empty(), "positions left after liquidation: {positions:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn backtests_match_the_oracle(seed in 0u64..10_000, n in 2usize..8, days in 1usize..25, cost_ix in 0usize..3) {
        let cost = CostModel::ALL[cost_ix];
        let (p, b) = market(seed, n, days, 0.004);
        let r = long_only_backtest(&p, &b, cost, 1000.0).unwrap();
        let (cash, fills) = oracle::long_only(&p, &b, cost, 1000.0);
        prop_assert!(rel(r.final_cash, cash) <= 1e-12);
        prop_assert!(oracle::same_fills(&oracle::fills_of(&p, &r.trades), &fills, 1e-12));
        assert_replays(&r);

        let nl = 1 + (seed as usize) % (n - 1);
        let ns = 1 + (seed as usize / 7) % (n - nl);
        let r = long_short_backtest(&p, &b, cost, 1000.0, nl, ns).unwrap();
        let (cash, fills) = oracle::long_short(&p, &b, cost, 1000.0, nl, ns);
        prop_assert!(rel(r.final_cash, cash) <= 1e-12);
        prop_assert!(oracle::same_fills(&oracle::fills_of(&p, &r.trades), &fills, 1e-12));
        assert_replays(&r);
    }

    #[test]
    fn costs_never_help(seed in 0u64..10_000, n in 2usize..6, days in 2usize..20) {
        let (p, b) = market(seed, n, days, 0.01);
        let free = long_only_backtest(&p, &b, CostModel::None, 500.0).unwrap();
        for cost in [CostModel::HalfSpread, CostModel::BidAsk] {
            let r = long_only_backtest(&p, &b, cost, 500.0).unwrap();
            prop_assert_eq!(r.trade_count(), free.trade_count());
            if free.trade_count() > 0 {
                prop_assert!(r.overall_return() <= free.overall_return());
            }
        }
        let free = long_short_backtest(&p, &b, CostModel::None, 500.0, 1, 1).unwrap();
        for cost in [CostModel::HalfSpread, CostModel::BidAsk] {
            let r = long_short_backtest(&p, &b, cost, 500.0, 1, 1).unwrap();
            if free.trade_count() > 0 {
                prop_assert!(r.overall_return() <= free.overall_return());
            }
        }
    }

    #[test]
    fn zero_spreads_make_costs_agree(seed in 0u64..10_000, n in 2usize..6, days in 1usize..20) {
        let (p, b) = market(seed, n, days, 0.01);
        let b = b.without_spreads();
        let base = long_short_backtest(&p, &b, CostModel::None, 100.0, 1, 1).unwrap().overall_return();
        let lo = long_only_backtest(&p, &b, CostModel::None, 100.0).unwrap().overall_return();
        for cost in [CostModel::HalfSpread, CostModel::BidAsk] {
            let r = long_short_backtest(&p, &b, cost, 100.0, 1, 1).unwrap().overall_return();
            prop_assert!((r - base).abs() <= 1e-12);
            let r = long_only_backtest(&p, &b, cost, 100.0).unwrap().overall_return();
            prop_assert!((r - lo).abs() <= 1e-12);
        }
    }

    #[test]
    fn long_only_positions_and_cash_stay_non_negative(seed in 0u64..10_000, n in 1usize..6, days in 1usize..20) {
        let (p, b) = market(seed, n, days, 0.004);
        let r = long_only_backtest(&p, &b, CostModel::BidAsk, 100.0).unwrap();
        let mut ledger = Ledger::new(100.0);
        for t in &r.trades {
            ledger.trade(t.day, &t.ticker, t.side, t.shares, t.price);
            prop_assert!(ledger.position(&t.ticker) >= -1e-9);
            // each day's buys spend the balance down to rounding residue
            prop_assert!(ledger.cash >= -1e-9 * 100.0);
        }
    }

    #[test]
    fn long_short_opening_legs_are_cash_neutral(seed in 0u64..10_000, n in 2usize..7, days in 2usize..20) {
        let (p, b) = market(seed, n, days, 0.004);
        let (nl, ns) = (1 + seed as usize % (n - 1), 1);
        let r = long_short_backtest(&p, &b, CostModel::HalfSpread, 100.0, nl, ns).unwrap();
        let last = *p.days.last().unwrap();
        let mut ledger = Ledger::new(100.0);
        for &day in &p.days[..p.days.len() - 1] {
            let today: Vec<_> = r.trades.iter().filter(|t| t.day == day).collect();
            if today.is_empty() {
                continue;
            }
            prop_assert!(today.len() >= nl + ns);
            let (flatten, open) = today.split_at(today.len() - nl - ns);
            for t in flatten {
                ledger.trade(t.day, &t.ticker, t.side, t.shares, t.price);
            }
            let after_flatten = ledger.cash;
            for t in open {
                ledger.trade(t.day, &t.ticker, t.side, t.shares, t.price);
            }
            prop_assert!((ledger.cash - after_flatten).abs() <= 1e-12 * after_flatten.abs().max(1.0));
        }
        prop_assert!(r.trades.iter().all(|t| t.day <= last));
    }

    #[test]
    fn capital_scales_out(seed in 0u64..10_000, n in 2usize..6, days in 1usize..20) {
        let (p, b) = market(seed, n, days, 0.004);
        for k in [10.0, 0.37] {
            let a = long_only_backtest(&p, &b, CostModel::BidAsk, 100.0).unwrap();
            let s = long_only_backtest(&p, &b, CostModel::BidAsk, 100.0 * k).unwrap();
            prop_assert!((a.overall_return() - s.overall_return()).abs() <= 1e-12);
            prop_assert!(rel(a.final_cash * k, s.final_cash) <= 1e-12);
            let a = long_short_backtest(&p, &b, CostModel::BidAsk, 100.0, 1, 1).unwrap();
            let s = long_short_backtest(&p, &b, CostModel::BidAsk, 100.0 * k, 1, 1).unwrap();
            prop_assert!((a.overall_return() - s.overall_return()).abs() <= 1e-12);
        }
    }
}

#[test]
fn gate_holds_positions_on_quiet_days() {
    let (mut p, b) = market(3, 4, 12, 0.004);
    for d in (1..12).step_by(2) {
        for v in p.predicted[d].iter_mut() {
            *v = v.abs() + 0.001;
        }
    }
    let r = long_short_backtest(&p, &b, CostModel::None, 100.0, 1, 1).unwrap();
    let last = *p.days.last().unwrap();
    for d in (1..12).step_by(2) {
        if p.days[d] != last {
            assert!(r.trades.iter().all(|t| t.day != p.days[d]));
        }
    }
}

#[test]
fn zero_predictions_never_trade() {
    let (mut p, b) = market(4, 3, 5, 0.004);
    p.predicted.iter_mut().flatten().for_each(|v| *v = 0.0);
    assert_eq!(long_only_backtest(&p, &b, CostModel::BidAsk, 10.0).unwrap().trade_count(), 0);
    assert_eq!(long_short_backtest(&p, &b, CostModel::BidAsk, 10.0, 1, 1).unwrap().trade_count(), 0);
}

#[test]
fn grid_cells_equal_standalone_runs() {
    let (p, b) = market(11, 30, 15, 0.004);
    let g = sweep_grid(&p, &b, CostModel::BidAsk, 1e6, 15, 15).unwrap();
    assert_eq!((g.max_long(), g.max_short()), (15, 15));
    for (l, s) in [(1, 1), (15, 15), (3, 12), (15, 1)] {
        let r = long_short_backtest(&p, &b, CostModel::BidAsk, 1e6, l, s).unwrap();
        assert_eq!(g.get(l, s), r.overall_return());
    }
}

#[test]
fn grid_on_closed_gate_is_all_zero() {
    let (mut p, b) = market(12, 30, 5, 0.004);
    p.predicted.iter_mut().flatten().for_each(|v| *v = 0.01);
    let g = sweep_grid(&p, &b, CostModel::None, 100.0, 15, 15).unwrap();
    assert!(g.returns.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn grid_reports_failing_cell() {
    let (p, b) = market(13, 5, 3, 0.0);
    let err = sweep_grid(&p, &b, CostModel::None, 100.0, 3, 3).unwrap_err();
    assert!(err.to_string().starts_with("grid cell (long_"), "{err}");
}

#[test]
fn buy_and_hold_flat_prices_return_zero() {
    let (p, b) = market(14, 3, 6, 0.0);
    let mut flat = PriceBook::new();
    for t in &p.tickers {
        for &d in &p.days {
            flat.insert(t, d, *b.quote(t, p.days[0]).unwrap());
        }
    }
    let r = buy_and_hold(&flat, &p.tickers, &p.days, CostModel::None, 1000.0).unwrap();
    assert!(r.overall_return().abs() < 1e-12);
    assert_eq!(r.trades.iter().filter(|t| t.side == Side::Buy).count(), 3);
}
