//! Seeded synthetic data for tests, demos and smoke runs.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{FeatureRow, IndexBar, StockBar};

/// The next `n` weekdays starting at `start` (inclusive if it is one).
pub fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Coefficients of `y_t = phi1 * y_{t-1} + phi2 * y_{t-2} + e_t`.
pub const AR2_PHI: (f64, f64) = (0.6, -0.3);

/// Noise scale of the AR(2) series, on the order of a daily return.
pub const AR2_NOISE: f64 = 0.01;

/// A stationary AR(2) path of length `len` after a burn-in.
pub fn ar2_path(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, AR2_NOISE).expect("valid sigma");
    let burn = 100;
    let mut y = vec![0.0, 0.0];
    for t in 2..len + burn {
        let e = noise.sample(&mut rng);
        y.push(AR2_PHI.0 * y[t - 1] + AR2_PHI.1 * y[t - 2] + e);
    }
    y.split_off(burn)
}

/// Feature rows over an AR(2) path on consecutive weekdays from `start`.
///
/// The `ret` column carries the series itself, so the next row's `ret` is
/// the one-step-ahead target. The other six columns are lags and transforms
/// of it: `y_{t-1}`, `y_{t-2}`, `y_t^2`, `|y_t|`, `y_t - y_{t-1}` and the
/// five-day mean.
pub fn ar2_feature_rows(len: usize, start: NaiveDate, seed: u64) -> Vec<FeatureRow> {
    let pad = 4;
    let y = ar2_path(len + pad, seed);
    let dates = weekdays(start, len);
    (0..len)
        .map(|i| {
            let t = i + pad;
            let mean5 = y[t - 4..=t].iter().sum::<f64>() / 5.0;
            FeatureRow::with_features(
                dates[i],
                [y[t], y[t - 1], y[t - 2], y[t] * y[t], y[t].abs(), y[t] - y[t - 1], mean5],
            )
        })
        .collect()
}

/// Bars for a set of tickers plus the matching index series.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    pub stocks: Vec<(String, Vec<StockBar>)>,
    pub index: Vec<IndexBar>,
}

/// A one-factor market: each ticker's daily return is `beta * m_t` plus its
/// own AR(2) component, with quoted spreads between 5 and 20 basis points.
pub fn synthetic_market(tickers: &[&str], start: NaiveDate, days: usize, seed: u64) -> SyntheticMarket {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dates = weekdays(start, days);
    let market = Normal::new(0.0003, 0.01).expect("valid sigma");
    let small = Normal::new(0.0, 0.002).expect("valid sigma");
    let m: Vec<f64> = (0..days).map(|_| market.sample(&mut rng)).collect();
    let index = dates
        .iter()
        .zip(&m)
        .map(|(&date, &mt)| IndexBar {
            date,
            dji_return: mt + small.sample(&mut rng),
            spx_return: mt + small.sample(&mut rng),
        })
        .collect();

    let stocks = tickers
        .iter()
        .map(|&ticker| {
            let beta = rng.gen_range(0.6..1.4);
            let own = ar2_path(days, rng.gen());
            let shares = rng.gen_range(1e8..1e9_f64).round();
            let mut close = rng.gen_range(20.0..200.0_f64);
            let bars = (0..days)
                .map(|t| {
                    if t > 0 {
                        close *= 1.0 + beta * m[t] + own[t];
                    }
                    let half = close * rng.gen_range(0.0005..0.002) / 2.0;
                    let activity = 1.0 + 40.0 * (beta * m[t] + own[t]).abs();
                    StockBar {
                        date: dates[t],
                        close,
                        bid: close - half,
                        ask: close + half,
                        volume: (rng.gen_range(5e5..2e6) * activity).round(),
                        shares_outstanding: shares,
                    }
                })
                .collect();
            (ticker.to_string(), bars)
        })
        .collect();
    SyntheticMarket { stocks, index }
}
